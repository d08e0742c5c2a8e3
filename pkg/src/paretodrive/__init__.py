"""Two-phase multiobjective MPC for EV longitudinal control."""

__version__ = "0.1.0"
