"""Ready-made experiments ``fig5`` to ``fig8``.

Each preset fixes the link, the equalizer kinds with their learning rates and
a coarse sweep grid; override any field in the saved JSON.
"""
from .config import parse_config

GBD = 1e9


def _fig5():
    return {
        "name": "fig5",
        "channel": {"alphabet": "bpsk", "linear_response": "proakis_b", "nonlinearity": "identity", "snr_db": 14.0},
        "equalizers": [
            {"kind": "gan_cnn", "lr": 0.001, "lr_d": 0.0005},
            {"kind": "gan_lin", "lr": 0.001, "lr_d": 0.0005},
            {"kind": "sup_cnn", "lr": 0.005},
            {"kind": "sup_lin", "lr": 0.001},
            {"kind": "lms", "lr": 0.01},
            {"kind": "wo_eq", "lr": 0.0},
        ],
        "schedule": {"n_ti": 20_000},
        "runs": {"n_runs": 5},
        "sweep": {"axis": "snr_db", "values": [10.0, 12.0, 14.0, 16.0, 18.0, 20.0]},
    }


def _fig6():
    return {
        "name": "fig6",
        "channel": {
            "alphabet": "pam2", "linear_response": "fiber", "nonlinearity": "sld", "snr_db": 20.0,
            "fiber": {"length_m": 30e3}, "symbol_rate": 40 * GBD,
        },
        "equalizers": [
            {"kind": "gan_cnn", "lr": 0.001, "lr_d": 0.001},
            {"kind": "gan_lin", "lr": 0.001, "lr_d": 0.001},
            {"kind": "sup_cnn", "lr": 0.0005},
            {"kind": "sup_lin", "lr": 0.005},
            {"kind": "volterra", "lr": 0.007},
            {"kind": "wo_eq", "lr": 0.0},
        ],
        "schedule": {"n_ti": 20_000},
        "runs": {"n_runs": 5},
        "sweep": {"axis": "symbol_rate", "values": [v * GBD for v in (20, 30, 40, 50)]},
    }


def _fig7():
    return {
        "name": "fig7",
        "channel": {
            "alphabet": "pam4", "linear_response": "fiber", "nonlinearity": "sld", "snr_db": 26.0,
            "fiber": {"length_m": 15e3}, "symbol_rate": 30 * GBD,
        },
        "equalizers": [
            {"kind": "gan_cnn", "lr": 0.001, "lr_d": 0.001},
            {"kind": "sup_cnn", "lr": 0.002},
            {"kind": "volterra", "lr": 0.003},
            {"kind": "wo_eq", "lr": 0.0},
        ],
        "schedule": {"n_ti": 20_000},
        "runs": {"n_runs": 7},
        "sweep": {"axis": "symbol_rate", "values": [v * GBD for v in (20, 30, 40, 50)]},
    }


def _fig8():
    return {
        "name": "fig8",
        "channel": {
            "alphabet": "pam4", "linear_response": "fiber", "nonlinearity": "sld", "snr_db": 20.0,
            "fiber": {"length_m": 15e3}, "symbol_rate": 25 * GBD,
        },
        "equalizers": [{"kind": "gan_cnn", "lr": 0.001, "lr_d": 0.001}],
        "schedule": {"n_ti": 20_000},
        "runs": {"n_runs": 5},
        "sweep": {"axis": "snr_db", "values": []},
        "evaluation": {"histogram_at": [0.01, 0.05, 0.25, 1.0]},
    }


PRESETS = {"fig5": _fig5, "fig6": _fig6, "fig7": _fig7, "fig8": _fig8}


def preset(name):
    """Fully resolved :class:`ExperimentConfig` for one of ``fig5`` ... ``fig8``."""
    try:
        make = PRESETS[name]
    except KeyError:
        raise KeyError(f"unknown preset {name!r}; available: {', '.join(sorted(PRESETS))}") from None
    return parse_config(make())
