"""Heavy-tailed weighted sums, linear processes and their normalizers."""

import json

from ._core import (
    CoefficientSpec,
    ConditionError,
    ConfigError,
    InnovationStream,
    LinearProcessPlan,
    NormalizerReport,
    PathStatistics,
    SlowlyVarying,
    TailModel,
    WeightArray,
    WindowOptions,
    __version__,
    calpha,
    canonical_config,
    check_coeffD,
    check_gen,
    condition_sum,
    cvm_normal,
    fractional_coeffs,
    ks_critical_95,
    ks_normal,
    run_and_write,
    solve_Dn,
    weighted_sum,
    window_sums,
)


def _as_text(config):
    return config if isinstance(config, str) else json.dumps(config)


def run_experiment(config, threads=0):
    """Run a config (dict or JSON text) and return the report as a dict."""
    from ._core import run_experiment_json

    return json.loads(run_experiment_json(_as_text(config), threads))


def write_outputs(config, threads=0):
    """Run a config and write its CSV and JSON outputs; returns the paths."""
    return [str(p) for p in run_and_write(_as_text(config), threads)]
