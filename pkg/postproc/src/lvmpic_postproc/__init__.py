"""Plotting for lvmpic run artifacts (CSV scalar series + binary field lines)."""

from .plots import PlotJob, plot_damping, plot_dispersion, plot_energy_error

__version__ = "0.1.0"
