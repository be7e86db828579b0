"""Experiment configuration, presets, the main time loop and outputs.

Configs are sectioned key = value text. Unknown sections or keys are
rejected with the offending line number; defaults are filled in and the
effective config is echoed bit-exactly into the output directory, so a
run can always be reproduced from its artifacts.
"""

import json
import os
import struct
import time as _time
from dataclasses import dataclass, field

import numpy as np

from . import diagnostics, feec, geometry, markers as mk, propagators
from .diagnostics import ScalarSeries
from .errors import ConfigError
from .geometry import MappingSpec
from .markers import BackgroundSpec, PhysParams

GRID_MAGIC = b"LVMGRID1"
FIELD_MAGIC = b"LVMFLD01"

FOUR_PI = 4.0 * np.pi


@dataclass(frozen=True)
class ExperimentSpec:
    kind: str = "landau"
    delta: float = 1e-3
    k_mode: float = 0.5
    noise_amplitude: float = 1e-4
    mode_count: int = 80
    phase_rule: str = "random"
    init_e1: str = "poisson"


@dataclass
class SimConfig:
    mapping: MappingSpec
    n_cells: tuple
    degrees: tuple
    phys: PhysParams
    background: BackgroundSpec
    model: str
    experiment: ExperimentSpec
    dt: float
    t_end: float
    splitting: str
    per_cell: int
    seed: int
    scheme: str
    cg_tol: float
    cg_max_iter: int
    output_dir: str
    save_every_steps: int
    save_fields: bool
    save_markers: bool

    @property
    def n_markers(self):
        n1, n2, n3 = self.n_cells
        return self.per_cell * n1 * n2 * n3

    @property
    def n_steps(self):
        return int(round(self.t_end / self.dt))


# ---------------------------------------------------------------------------
# config schema and parsing


def _float(s):
    return float(s)


def _int(s):
    return int(s)


def _bool(s):
    low = s.strip().lower()
    if low in ("true", "yes", "1", "on"):
        return True
    if low in ("false", "no", "0", "off"):
        return False
    raise ValueError(f"not a boolean: {s!r}")


def _triple(conv):
    def parse(s):
        parts = s.split()
        if len(parts) != 3:
            raise ValueError(f"expected three values, got {s!r}")
        return tuple(conv(p) for p in parts)

    return parse


def _choice(*options):
    def parse(s):
        low = s.strip().lower()
        if low not in options:
            raise ValueError(f"must be one of {options}, got {s!r}")
        return low

    return parse


_REQUIRED = object()

_SCHEMA = {
    "mapping": {
        "kind": (_choice("cuboid", "colella"), "cuboid"),
        "lx": (_float, _REQUIRED),
        "ly": (_float, 1.0),
        "lz": (_float, 1.0),
        "alpha_c": (_float, 0.0),
    },
    "grid": {
        "n_cells": (_triple(_int), _REQUIRED),
        "degrees": (_triple(_int), _REQUIRED),
    },
    "phys": {
        "alpha2": (_float, 1.0),
        "eps": (_float, -1.0),
        "v_th": (_float, 1.0),
    },
    "background": {
        "n0": (_float, 1.0),
        "b0": (_triple(_float), (0.0, 0.0, 0.0)),
    },
    "model": {
        "kind": (_choice("lvm", "lva", "direct_deltaf"), "lvm"),
    },
    "experiment": {
        "kind": (_choice("landau", "bernstein", "custom"), "landau"),
        "delta": (_float, 1e-3),
        "k_mode": (_float, 0.5),
        "noise_amplitude": (_float, 1e-4),
        "mode_count": (_int, 80),
        "phase_rule": (_choice("random", "quadratic", "none"), "random"),
        "init_e1": (_choice("poisson", "zero"), "poisson"),
    },
    "time": {
        "dt": (_float, _REQUIRED),
        "t_end": (_float, _REQUIRED),
        "splitting": (_choice("strang", "lie_trotter"), "strang"),
    },
    "particles": {
        "per_cell": (_int, _REQUIRED),
        "seed": (_int, 1234),
        "scheme": (_choice("pseudo_random", "sobol"), "pseudo_random"),
    },
    "solvers": {
        "cg_tol": (_float, 1e-12),
        "cg_max_iter": (_int, 20000),
    },
    "output": {
        "dir": (str, ""),
        "save_every_steps": (_int, 1),
        "save_fields": (_bool, False),
        "save_markers": (_bool, False),
    },
}

_SECTION_ORDER = tuple(_SCHEMA)


def _parse_sections(text):
    """Sectioned key = value lines -> ({(sec, key): raw}, {(sec, key): line})."""
    values, lines = {}, {}
    section = None
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if line.startswith("[") and line.endswith("]"):
            section = line[1:-1].strip().lower()
            if section not in _SCHEMA:
                raise ConfigError(f"unknown section [{section}]", line=lineno)
            continue
        if "=" not in line:
            raise ConfigError(f"expected key = value, got {line!r}", line=lineno)
        if section is None:
            raise ConfigError("key outside any [section]", line=lineno)
        key, _, val = line.partition("=")
        key = key.strip().lower()
        if key not in _SCHEMA[section]:
            raise ConfigError(f"unknown key {key!r} in [{section}]", line=lineno)
        values[(section, key)] = val.strip()
        lines[(section, key)] = lineno
    return values, lines


def parse_config(text):
    """Parse and validate a config; unknown keys are rejected."""
    raw, lines = _parse_sections(text)
    parsed = {}
    for section, keys in _SCHEMA.items():
        for key, (conv, default) in keys.items():
            if (section, key) in raw:
                try:
                    parsed[(section, key)] = conv(raw[(section, key)])
                except ValueError as exc:
                    raise ConfigError(
                        f"[{section}] {key}: {exc}", line=lines[(section, key)]
                    ) from exc
            elif default is _REQUIRED:
                raise ConfigError(f"missing required key {key!r} in [{section}]")
            else:
                parsed[(section, key)] = default

    def get(section, key):
        return parsed[(section, key)]

    def invariant(cond, section, key, message):
        if not cond:
            raise ConfigError(
                f"[{section}] {key}: {message}", line=lines.get((section, key))
            )

    invariant(get("time", "dt") > 0.0, "time", "dt", "dt must be positive")
    invariant(
        get("time", "t_end") >= get("time", "dt"), "time", "t_end",
        "t_end must be at least dt",
    )
    invariant(
        get("particles", "per_cell") >= 1, "particles", "per_cell",
        "per_cell must be at least 1",
    )
    invariant(
        0.0 < get("solvers", "cg_tol") <= 1e-3, "solvers", "cg_tol",
        "cg_tol must be in (0, 1e-3]",
    )
    invariant(
        get("output", "save_every_steps") >= 1, "output", "save_every_steps",
        "save_every_steps must be at least 1",
    )

    try:
        mapping = MappingSpec(
            kind=get("mapping", "kind"),
            lengths=(get("mapping", "lx"), get("mapping", "ly"), get("mapping", "lz")),
            alpha_c=get("mapping", "alpha_c"),
        )
        phys = PhysParams(
            alpha2=get("phys", "alpha2"),
            eps=get("phys", "eps"),
            v_th=get("phys", "v_th"),
        )
        background = BackgroundSpec(n0=get("background", "n0"), b0=get("background", "b0"))
    except Exception as exc:
        raise ConfigError(str(exc)) from exc

    return SimConfig(
        mapping=mapping,
        n_cells=get("grid", "n_cells"),
        degrees=get("grid", "degrees"),
        phys=phys,
        background=background,
        model=get("model", "kind"),
        experiment=ExperimentSpec(
            kind=get("experiment", "kind"),
            delta=get("experiment", "delta"),
            k_mode=get("experiment", "k_mode"),
            noise_amplitude=get("experiment", "noise_amplitude"),
            mode_count=get("experiment", "mode_count"),
            phase_rule=get("experiment", "phase_rule"),
            init_e1=get("experiment", "init_e1"),
        ),
        dt=get("time", "dt"),
        t_end=get("time", "t_end"),
        splitting=get("time", "splitting"),
        per_cell=get("particles", "per_cell"),
        seed=get("particles", "seed"),
        scheme=get("particles", "scheme"),
        cg_tol=get("solvers", "cg_tol"),
        cg_max_iter=get("solvers", "cg_max_iter"),
        output_dir=get("output", "dir"),
        save_every_steps=get("output", "save_every_steps"),
        save_fields=get("output", "save_fields"),
        save_markers=get("output", "save_markers"),
    )


def _fmt(value):
    if isinstance(value, bool):
        return "true" if value else "false"
    if isinstance(value, float):
        return repr(value)
    if isinstance(value, tuple):
        return " ".join(_fmt(v) for v in value)
    return str(value)


def format_config(cfg):
    """Canonical text of the effective config (used for the echo file)."""
    values = {
        ("mapping", "kind"): cfg.mapping.kind,
        ("mapping", "lx"): cfg.mapping.lengths[0],
        ("mapping", "ly"): cfg.mapping.lengths[1],
        ("mapping", "lz"): cfg.mapping.lengths[2],
        ("mapping", "alpha_c"): cfg.mapping.alpha_c,
        ("grid", "n_cells"): cfg.n_cells,
        ("grid", "degrees"): cfg.degrees,
        ("phys", "alpha2"): cfg.phys.alpha2,
        ("phys", "eps"): cfg.phys.eps,
        ("phys", "v_th"): cfg.phys.v_th,
        ("background", "n0"): cfg.background.n0,
        ("background", "b0"): cfg.background.b0,
        ("model", "kind"): cfg.model,
        ("experiment", "kind"): cfg.experiment.kind,
        ("experiment", "delta"): cfg.experiment.delta,
        ("experiment", "k_mode"): cfg.experiment.k_mode,
        ("experiment", "noise_amplitude"): cfg.experiment.noise_amplitude,
        ("experiment", "mode_count"): cfg.experiment.mode_count,
        ("experiment", "phase_rule"): cfg.experiment.phase_rule,
        ("experiment", "init_e1"): cfg.experiment.init_e1,
        ("time", "dt"): cfg.dt,
        ("time", "t_end"): cfg.t_end,
        ("time", "splitting"): cfg.splitting,
        ("particles", "per_cell"): cfg.per_cell,
        ("particles", "seed"): cfg.seed,
        ("particles", "scheme"): cfg.scheme,
        ("solvers", "cg_tol"): cfg.cg_tol,
        ("solvers", "cg_max_iter"): cfg.cg_max_iter,
        ("output", "dir"): cfg.output_dir,
        ("output", "save_every_steps"): cfg.save_every_steps,
        ("output", "save_fields"): cfg.save_fields,
        ("output", "save_markers"): cfg.save_markers,
    }
    out = []
    for section in _SECTION_ORDER:
        out.append(f"[{section}]")
        for key in _SCHEMA[section]:
            out.append(f"{key} = {_fmt(values[(section, key)])}")
        out.append("")
    return "\n".join(out)


# ---------------------------------------------------------------------------
# presets


def _preset_landau_cartesian():
    return {
        ("mapping", "lx"): repr(FOUR_PI),
        ("grid", "n_cells"): "32 1 1",
        ("grid", "degrees"): "3 1 1",
        ("model", "kind"): "lva",
        ("experiment", "kind"): "landau",
        ("experiment", "delta"): "0.001",
        ("experiment", "k_mode"): "0.5",
        ("time", "dt"): "0.05",
        ("time", "t_end"): "30.0",
        ("particles", "per_cell"): "1000",
        ("particles", "seed"): "10",
        ("particles", "scheme"): "sobol",
        ("solvers", "cg_tol"): "1e-12",
    }


def _preset_landau_colella():
    # mode-1 perturbation: the printed k = 0.5 is not 12-periodic, so the
    # preset uses k = 2*pi/12 for an exactly periodic initial condition
    base = _preset_landau_cartesian()
    base.update({
        ("mapping", "kind"): "colella",
        ("mapping", "lx"): "12.0",
        ("mapping", "alpha_c"): "0.1",
        ("grid", "n_cells"): "24 24 1",
        ("grid", "degrees"): "3 3 1",
        ("experiment", "k_mode"): repr(2.0 * np.pi / 12.0),
    })
    return base


def _preset_bernstein():
    return {
        ("mapping", "lx"): "144.0",
        ("mapping", "ly"): "0.8",
        ("mapping", "lz"): "0.8",
        ("grid", "n_cells"): "1024 1 1",
        ("grid", "degrees"): "3 1 1",
        ("phys", "v_th"): "0.2",
        ("background", "b0"): "0.0 0.0 1.0",
        ("model", "kind"): "lvm",
        ("experiment", "kind"): "bernstein",
        ("experiment", "noise_amplitude"): "0.0001",
        ("experiment", "phase_rule"): "random",
        ("time", "dt"): "0.25",
        ("time", "t_end"): "2000.0",
        ("particles", "per_cell"): "100",
        ("particles", "seed"): "20240902",
        ("particles", "scheme"): "sobol",
        ("output", "save_fields"): "true",
    }


def _preset_bernstein_scaled():
    base = _preset_bernstein()
    base.update({
        ("mapping", "lx"): "72.0",
        ("grid", "n_cells"): "256 1 1",
        ("phys", "v_th"): "0.06",
        ("experiment", "phase_rule"): "quadratic",
        ("time", "t_end"): "500.0",
        ("particles", "per_cell"): "200",
    })
    return base


_PRESETS = {
    "landau-cartesian": _preset_landau_cartesian,
    "landau-colella": _preset_landau_colella,
    "bernstein": _preset_bernstein,
    "bernstein-scaled": _preset_bernstein_scaled,
}


def preset_names():
    return sorted(_PRESETS)


def preset_text(name):
    """Render a named preset as config text."""
    if name not in _PRESETS:
        raise KeyError(name)
    overrides = _PRESETS[name]()
    out = []
    for section in _SECTION_ORDER:
        body = []
        for key in _SCHEMA[section]:
            if (section, key) in overrides:
                body.append(f"{key} = {overrides[(section, key)]}")
        if body:
            out.append(f"[{section}]")
            out.extend(body)
            out.append("")
    return "\n".join(out)


def load_preset(name):
    return parse_config(preset_text(name))


# ---------------------------------------------------------------------------
# simulation


@dataclass
class RunRecord:
    """Everything a finished run produced, plus handles for analysis."""

    config: SimConfig
    series: ScalarSeries
    timings: dict
    ex_times: np.ndarray = None
    ex_xs: np.ndarray = None
    ex_values: np.ndarray = None
    sim: "Simulation" = field(default=None, repr=False)


class Simulation:
    """Owns the discrete state and advances it step by step."""

    def __init__(self, config, _state=None):
        self.config = config
        self.mapping = config.mapping
        self.complex = feec.build_complex(config.n_cells, config.degrees)
        self.masses = feec.MassMatrices(
            M1=feec.assemble_mass(self.complex, self.mapping, feec.V1),
            M2=feec.assemble_mass(self.complex, self.mapping, feec.V2),
        )
        self.stepper = propagators.Stepper(
            self.complex, self.mapping, self.masses, config.phys,
            config.background, cg_tol=config.cg_tol,
            cg_max_iter=config.cg_max_iter,
        )
        self.schedule = self._build_schedule()
        if _state is None:
            self.batch, self.fields = self._initial_state()
            self.step_index = 0
        else:
            self.batch, self.fields, self.step_index = _state
            self.fields.b0 = propagators.project_constant_b0(
                self.complex, self.mapping, config.background.b0
            )
            self.fields.e0 = np.zeros(self.complex.N1)
        self._rows = []
        self._ex_rows = []
        self._ex_sampler = self._build_ex_sampler()
        self._record_scalars()
        if self.step_index % config.save_every_steps == 0:
            self._ex_rows.append((self.step_index, self._ex_sampler(self.fields.e1)))

    # -- construction -----------------------------------------------------

    def _build_schedule(self):
        cfg = self.config
        if cfg.model == "lvm":
            subs = propagators.DEFAULT_SCHEDULE
        elif cfg.model == "lva":
            subs = ("coupling", "advect_eta", "lorentz_e", "lorentz_b")
        else:
            subs = propagators.DDF_SCHEDULE
        return propagators.SubstepSchedule(subs, cfg.splitting)

    def _initial_state(self):
        cfg = self.config
        batch = mk.sample_markers(
            cfg.n_markers, self.mapping, cfg.phys, cfg.seed, scheme=cfg.scheme
        )
        self._init_weights(batch)
        fields = propagators.FieldState.zeros(self.complex)
        fields.b0 = propagators.project_constant_b0(
            self.complex, self.mapping, cfg.background.b0
        )
        fields.e1 = self._initial_e1(batch)
        return batch, fields

    def _init_weights(self, batch):
        cfg = self.config
        exp = cfg.experiment
        n0 = cfg.background.n0
        v_th = cfg.phys.v_th
        if exp.kind == "landau":
            k = exp.k_mode

            def f1(x, v):
                return exp.delta * n0 * mk.maxwellian(v, v_th) * np.cos(k * x[:, 0])

            mk.init_weights(batch, f1, self.mapping)
        elif exp.kind == "bernstein":
            if exp.phase_rule == "random":
                rng = np.random.Generator(
                    np.random.Philox(np.random.SeedSequence(cfg.seed, spawn_key=(1,)))
                )
                noise = 2.0 * rng.random(batch.count) - 1.0
                batch.w = exp.noise_amplitude * self.mapping.volume * noise
            else:
                modes = np.arange(exp.mode_count + 1)
                phases = (
                    2.0 * np.pi * np.sqrt(2.0) * modes**2
                    if exp.phase_rule == "quadratic"
                    else np.zeros_like(modes, dtype=float)
                )
                lx = self.mapping.lengths[0]
                amp = exp.noise_amplitude

                def f1(x, v):
                    arg = (
                        2.0 * np.pi * modes[None, :] * x[:, 0:1] / lx
                        + phases[None, :]
                    )
                    return amp * n0 * mk.maxwellian(v, v_th) * np.sin(arg).sum(axis=1)

                mk.init_weights(batch, f1, self.mapping)
        # custom: weights stay zero

    def _initial_e1(self, batch):
        cfg = self.config
        exp = cfg.experiment
        kappa = cfg.phys.alpha2 / cfg.phys.eps
        if exp.kind == "landau":
            k = exp.k_mode
            delta = exp.delta

            def integrand(etas):
                x1 = geometry.map_positions(self.mapping, etas)[:, 0]
                return kappa * delta * np.cos(k * x1) * geometry.sqrt_g(
                    self.mapping, etas
                )

            rho = propagators.assemble_dual_vector(self.complex, feec.V0, integrand)
        elif exp.kind == "bernstein" and exp.init_e1 == "poisson":
            idx, val = self.complex.eval_v0(batch.eta)
            rho = (kappa / batch.count) * np.bincount(
                idx.ravel(), weights=(val * batch.w[:, None]).ravel(),
                minlength=self.complex.N0,
            )
        else:
            return np.zeros(self.complex.N1)
        rho = rho - rho.mean()
        return feec.solve_poisson(
            self.complex, self.masses, rho, tol=cfg.cg_tol,
            max_iter=cfg.cg_max_iter,
        )

    def _build_ex_sampler(self):
        """Cartesian E_x at cell centers along a uniform logical x-line."""
        n1 = self.config.n_cells[0]
        etas = np.stack(
            [
                (np.arange(n1) + 0.5) / n1,
                np.full(n1, 0.5),
                np.full(n1, 0.5),
            ],
            axis=1,
        )
        self.ex_points = geometry.map_positions(self.mapping, etas)[:, 0]
        blocks = self.complex.eval_blocks(feec.V1, etas)
        dli = geometry.inverse_jacobians(self.mapping, etas)

        def sample(e1):
            ex = np.zeros(n1)
            for c, (idx, val) in enumerate(blocks):
                ex += dli[:, c, 0] * (val * e1[idx]).sum(axis=1)
            return ex

        return sample

    # -- time stepping ------------------------------------------------------

    def _record_scalars(self):
        h = diagnostics.hamiltonian(self.batch, self.fields, self.masses,
                                    self.config.phys)
        div_b = self.complex.div @ self.fields.b1
        div_inf = float(np.max(np.abs(div_b))) if div_b.size else 0.0
        t = self.step_index * self.config.dt
        if self._rows:
            prev = self._rows[-1]["H_total"]
            err = abs((h["H_total"] - prev) / prev) if prev != 0.0 else 0.0
        else:
            err = 0.0
        self._rows.append(
            {
                "time": t,
                "H_total": h["H_total"],
                "H_particles": h["H_particles"],
                "H_E": h["H_E"],
                "H_B": h["H_B"],
                "rel_energy_err": err,
                "div_b_inf": div_inf,
            }
        )

    def step(self):
        self.stepper.compose_step(
            self.schedule, self.fields, self.batch, self.config.dt
        )
        self.step_index += 1
        self._record_scalars()
        if self.step_index % self.config.save_every_steps == 0:
            self._ex_rows.append(
                (self.step_index, self._ex_sampler(self.fields.e1))
            )

    def run_steps(self, n):
        for _ in range(n):
            self.step()

    # -- results --------------------------------------------------------------

    def series(self):
        time_col = np.array([r["time"] for r in self._rows])
        columns = {
            name: np.array([r[name] for r in self._rows])
            for name in diagnostics.SCALAR_COLUMNS
        }
        return ScalarSeries(time=time_col, columns=columns)

    def ex_record(self):
        steps = np.array([s for s, _ in self._ex_rows])
        values = np.array([v for _, v in self._ex_rows])
        times = steps * self.config.dt
        return times, self.ex_points, values

    # -- checkpointing ----------------------------------------------------------

    def save_state(self, directory):
        os.makedirs(directory, exist_ok=True)
        mk.save_markers(self.batch, os.path.join(directory, "markers.bin"))
        write_fields(
            os.path.join(directory, "fields.bin"),
            self.fields.e1, self.fields.b1, self.step_index,
        )

    @classmethod
    def from_checkpoint(cls, config, directory):
        batch = mk.load_markers(
            os.path.join(directory, "markers.bin"), config.phys, config.background
        )
        e1, b1, step_index = read_fields(os.path.join(directory, "fields.bin"))
        fields = propagators.FieldState(
            e1=e1, b1=b1, e0=np.zeros_like(e1), b0=np.zeros_like(b1)
        )
        return cls(config, _state=(batch, fields, step_index))


def run(config):
    """Initialize, advance to t_end and optionally write the artifact set."""
    t0 = _time.perf_counter()
    sim = Simulation(config)
    sim.run_steps(config.n_steps)
    wall = _time.perf_counter() - t0
    series = sim.series()
    ex_times, ex_xs, ex_values = sim.ex_record()
    record = RunRecord(
        config=config,
        series=series,
        timings=dict(sim.stepper.timings, total=wall),
        ex_times=ex_times,
        ex_xs=ex_xs,
        ex_values=ex_values,
        sim=sim,
    )
    if config.output_dir:
        write_outputs(record, config.output_dir)
    return record


# ---------------------------------------------------------------------------
# artifact files


def write_fields(path, e1, b1, step_index):
    with open(path, "wb") as fh:
        fh.write(FIELD_MAGIC)
        fh.write(struct.pack("<QQQ", len(e1), len(b1), step_index))
        fh.write(np.asarray(e1).astype("<f8").tobytes())
        fh.write(np.asarray(b1).astype("<f8").tobytes())


def read_fields(path):
    with open(path, "rb") as fh:
        if fh.read(8) != FIELD_MAGIC:
            raise ValueError(f"bad field snapshot magic in {path}")
        n1, n2, step_index = struct.unpack("<QQQ", fh.read(24))
        e1 = np.frombuffer(fh.read(n1 * 8), dtype="<f8").astype(float)
        b1 = np.frombuffer(fh.read(n2 * 8), dtype="<f8").astype(float)
    return e1, b1, step_index


def write_ex_line(path, times, xs, values):
    """Field-line record: header (magic, n_t, n_x, dt_save, dx) + samples."""
    values = np.asarray(values, dtype=float)
    n_t, n_x = values.shape
    dt_save = float(times[1] - times[0]) if n_t > 1 else 0.0
    dx = float(xs[1] - xs[0]) if n_x > 1 else 0.0
    with open(path, "wb") as fh:
        fh.write(GRID_MAGIC)
        fh.write(struct.pack("<QQ", n_t, n_x))
        fh.write(struct.pack("<dd", dt_save, dx))
        fh.write(values.astype("<f8").tobytes())


def read_ex_line(path):
    with open(path, "rb") as fh:
        if fh.read(8) != GRID_MAGIC:
            raise ValueError(f"bad field-line magic in {path}")
        n_t, n_x = struct.unpack("<QQ", fh.read(16))
        dt_save, dx = struct.unpack("<dd", fh.read(16))
        values = np.frombuffer(fh.read(n_t * n_x * 8), dtype="<f8")
    values = values.reshape(n_t, n_x).astype(float)
    times = np.arange(n_t) * dt_save
    xs = np.arange(n_x) * dx
    return times, xs, values


def hybrid_parameters(config):
    """Plasma and cyclotron frequency in code units for a config."""
    omega_p = np.sqrt(config.phys.alpha2 * config.background.n0) / abs(
        config.phys.eps
    )
    omega_c = np.linalg.norm(config.background.b0) / abs(config.phys.eps)
    return omega_p, omega_c


def write_overlay_sidecar(path, config, k_max, n_k=48, bands=(1, 2, 3, 4)):
    """Analytic overlay samples for cross-checking the plotting component."""
    omega_p, omega_c = hybrid_parameters(config)
    hyb = diagnostics.hybrid_frequencies(omega_p, omega_c)
    ks = np.linspace(0.0, k_max, n_k)
    cold = {"omega_O": [], "omega_X_fast": [], "omega_X_slow": []}
    for k in ks:
        modes = diagnostics.cold_plasma_modes(float(k), omega_p, omega_c)
        for name in cold:
            cold[name].append(modes[name])
    bern = {}
    for band in bands:
        roots = []
        for k in ks:
            if k == 0.0:
                roots.append(None)
                continue
            try:
                roots.append(
                    diagnostics.bernstein_branch(
                        float(k), omega_p, omega_c, config.phys.v_th, band
                    )
                )
            except (ArithmeticError, ValueError):
                roots.append(None)
        bern[str(band)] = roots
    payload = {
        "omega_p": omega_p,
        "omega_c": omega_c,
        "v_th": config.phys.v_th,
        "omega_L": hyb["omega_L"],
        "omega_R": hyb["omega_R"],
        "k": ks.tolist(),
        "cold_modes": cold,
        "bernstein_branches": bern,
    }
    with open(path, "w") as fh:
        json.dump(payload, fh, indent=1)


def write_outputs(record, outdir):
    os.makedirs(outdir, exist_ok=True)
    cfg = record.config
    with open(os.path.join(outdir, "config.echo.txt"), "w") as fh:
        fh.write(format_config(cfg))
    diagnostics.write_scalars_csv(record.series, os.path.join(outdir, "scalars.csv"))
    if cfg.save_fields:
        write_ex_line(
            os.path.join(outdir, "ex_line.bin"),
            record.ex_times, record.ex_xs, record.ex_values,
        )
        sim = record.sim
        write_fields(
            os.path.join(outdir, "fields.bin"),
            sim.fields.e1, sim.fields.b1, sim.step_index,
        )
    if cfg.save_markers:
        mk.save_markers(record.sim.batch, os.path.join(outdir, "markers.bin"))
    if cfg.experiment.kind == "bernstein":
        k_nyq = np.pi * cfg.n_cells[0] / cfg.mapping.lengths[0]
        write_overlay_sidecar(
            os.path.join(outdir, "overlay.json"), cfg, k_max=float(k_nyq)
        )
    with open(os.path.join(outdir, "timings.json"), "w") as fh:
        json.dump(record.timings, fh, indent=1)
