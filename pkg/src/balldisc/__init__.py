"""L2 discrepancy of weighted point sets for balls on the torus.

Submodules load on first attribute access so that the command line can set
thread limits before numpy starts.
"""
import importlib

__version__ = "0.1.0"

_EXPORTS = {
    "torus": ("WeightedPointSet", "BallWindow", "PartitionCells", "grid_points", "sample_jitter",
              "weight_norm", "wrap", "wrap_distance"),
    "spectral": ("ball_fourier", "radial_weight", "BallWeights", "RadialWeights", "lattice_energy",
                 "FrequencyBudgetError"),
    "densities": ("DensityField", "constant_density", "single_mode", "periodized_bump", "scale_density",
                  "dvp_density", "holder_density", "lp_norm", "morrey_norm"),
    "engine": ("discrepancy_at", "avg_sq_x", "avg_sq_xr", "DiscrepancyReport", "make_kernel",
               "montgomery_certificate", "lower_bound_scale"),
    "jittered": ("JitterEstimate", "jitter_closed_form", "jitter_mc", "holder_rate_experiment"),
}
_WHERE = {name: mod for mod, names in _EXPORTS.items() for name in names}
__all__ = sorted(_WHERE)


def __getattr__(name):
    if name in _WHERE:
        return getattr(importlib.import_module(f".{_WHERE[name]}", __name__), name)
    if name in _EXPORTS or name == "lab":
        return importlib.import_module(f".{name}", __name__)
    raise AttributeError(f"module {__name__!r} has no attribute {name!r}")
