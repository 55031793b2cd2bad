"""primpair: primitive pairs with prescribed trace in finite field extensions.

Decides membership of (q, n) in the set of prime-power / degree pairs for
which every trace value a in F_q is hit by a primitive pair
(alpha, alpha + alpha^-1) in F_{q^n}, using exact sieve criteria backed by
character-sum bounds, plus brute-force verification for desk-scale fields.
"""

from importlib import import_module

__version__ = "0.1.0"

_EXPORTS = {
    "numtheory": (
        "Factorization",
        "IncompleteFactorizationError",
        "bound_margin",
        "euler_phi",
        "factorize",
        "mobius",
        "omega",
        "radical_primes",
        "squarefree_divisor_count",
        "theta",
    ),
    "ff": ("FieldElement", "FieldTower"),
    "sieve": (
        "SieveReport",
        "Verdict",
        "basic_criterion",
        "cq",
        "decide",
        "find_witness",
        "mersenne_shortcut",
        "n5_split",
        "nq_threshold",
        "pair_criterion",
        "sieve_eval",
        "worst_case_delta",
    ),
    "table1": ("ReferenceRow", "RowEvaluation", "evaluate_all", "evaluate_row", "load_rows"),
    "verify": (
        "VerifyReport",
        "confirm_exceptions",
        "count_na",
        "count_total",
        "lower_bound_check",
        "verify_pair",
        "witness_search",
    ),
    "charsum": (
        "CharacterSpec",
        "audit_field",
        "chi_a_sum",
        "chi_inner_sum",
        "count_via_characters",
        "eval_add_char",
        "eval_mult_char",
        "rho_indicator",
        "tau_indicator",
    ),
}

_ATTR_TO_MODULE = {name: mod for mod, names in _EXPORTS.items() for name in names}

__all__ = sorted(_ATTR_TO_MODULE)


def __getattr__(name: str):
    mod = _ATTR_TO_MODULE.get(name)
    if mod is None:
        raise AttributeError(f"module {__name__!r} has no attribute {name!r}")
    value = getattr(import_module(f".{mod}", __name__), name)
    globals()[name] = value
    return value


def __dir__():
    return sorted(set(globals()) | set(__all__))
