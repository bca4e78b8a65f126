"""Python bindings for the lmdp_lab C++ core.

Arrays go in and out as numpy arrays. Structured reports (chain
diagnostics, run summaries, verify reports) come back as dicts.
"""

import json as _json

from . import _core
from ._core import (
    AssumptionViolation,
    GenerationFailed,
    InvalidInput,
    LmdpError,
    NoCycle,
    NonConvergence,
    NonErgodic,
    NotPrimitive,
    SupportViolation,
    ZeroMarginal,
    bregman_negcondent,
    ergodicity_coefficient,
    feasibility_residual,
    generate_instance,
    kkt_residual,
    kl_divergence,
    max_expected_hitting_time,
    measure_from_policy,
    min_mean_cycle,
    minimize_f,
    objective_f,
    pinsker_lower_bound,
    primitivity_index,
    solve,
    stationary_distribution,
    tau_upper_bound,
    theoretical_bound,
)

TRACE_COLUMNS = (
    "t",
    "lambda_t",
    "idealized_loss",
    "expected_true_loss",
    "sampled_loss",
    "policy_change_l1",
    "lemma4_bound",
    "state_gap_l1",
    "pmudiff_bound",
    "cum_idealized_regret",
    "cum_true_regret_proxy",
    "v_span",
)


def analyze(P):
    """Chain diagnostics: alpha, tau, h_prim, h_hit, stationary, alpha_ub, tau_ub, p_star, B."""
    return _json.loads(_core.analyze(P))


def run_experiment(P, adversary="iid-uniform", T=100, mode="exact", seed=0,
                   adversary_seed=0, params=None, replay=None, mu0=None):
    """Run FTL for T rounds. Returns {"columns", "summary", "final_policy", "final_lambda"}."""
    out = _core.run_experiment(P, adversary, T, mode, seed, adversary_seed,
                               params or {}, replay, mu0)
    out["summary"] = _json.loads(out["summary"])
    return out


def run_config(config, seed=None, output=None, negative_control=False):
    """Run a config (dict or JSON text). Returns (exit_code, aggregate dict)."""
    text = config if isinstance(config, str) else _json.dumps(config)
    code, aggregate = _core.run_config(text, seed, output, negative_control)
    return code, _json.loads(aggregate)


def verify(P, c=None, samples=20, seed=0):
    """Returns (pass, report dict)."""
    ok, report = _core.verify(P, c, samples, seed)
    return ok, _json.loads(report)
