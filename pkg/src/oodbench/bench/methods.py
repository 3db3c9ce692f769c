"""Method registries: every benchmarkable detector and OOD synthesiser,
with its parameter schema (used for strict config validation) and a
builder producing a fitted, scoreable model."""

from ..data import Dataset
from ..detectors import (
    fit_aa_gp,
    fit_autoassoc,
    fit_gp,
    fit_lof,
    fit_mahalanobis,
    fit_md_aa,
    fit_ncgp,
    fit_ocsvm,
    fit_pca_trunc,
    fit_reference,
)
from ..rng import derive_seed
from ..synthesis import (
    SynthesisConfig,
    TPokeState,
    sample_uniform_ood,
    synthesise_fgsm,
    tpoke,
    train_supervised,
)
from ..toys import ToySpec
from ..weighting import weight_synthesised_set

__all__ = [
    "DETECTOR_SCHEMAS",
    "SYNTHESISER_SCHEMAS",
    "build_detector",
    "build_synthesiser",
]

DETECTOR_SCHEMAS = {
    "reference": {},
    "mahalanobis": {},
    "lof": {"k": 20},
    "ocsvm": {"nu": 0.5, "gamma": None},
    "gp": {"subsample_fraction": 0.1, "noise_var": 1e-4, "lengthscale_factor": 3.0},
    "ncgp": {
        "subsample_fraction": 0.1,
        "noise_scale": 2.0,
        "noise_var": 1e-4,
        "pseudo_noise_var": 1.0,
    },
    "pca": {"variance_threshold": 0.95},
    "autoassoc": {},
    "md_aa": {},
    "aa_gp": {"subsample_fraction": 0.01, "noise_var": 1e-2, "lengthscale_factor": 1.0},
}

_SYNTH_COMMON = {"n_ood": None, "weighted": False, "weight_space": None}

SYNTHESISER_SCHEMAS = {
    "uniform": dict(_SYNTH_COMMON),
    "fgsm_constant": dict(_SYNTH_COMMON, step=1.0, kde_bandwidth=None),
    "fgsm_uniform": dict(_SYNTH_COMMON, step_lo=0.0, step_hi=1.0, kde_bandwidth=None),
    "fgsm_tpoke": {
        "n_ood": None,
        "kde_bandwidth": None,
        "initial_t": 1.0,
        "backoff_factor": 2.0,
        "poke_factor": 0.5,
        "anneal_rate": 0.9,
        "criterion_threshold": 0.95,
        "max_cycles": 30,
        "step_mode": "constant",
    },
}


def build_detector(name: str, spec: ToySpec, train: Dataset, seed: int, params: dict):
    if name == "reference":
        return fit_reference(spec)
    if name == "mahalanobis":
        return fit_mahalanobis(train)
    if name == "lof":
        return fit_lof(train, k=params["k"])
    if name == "ocsvm":
        return fit_ocsvm(train, nu=params["nu"], gamma=params["gamma"])
    if name == "gp":
        return fit_gp(
            train,
            subsample_fraction=params["subsample_fraction"],
            seed=seed,
            noise_var=params["noise_var"],
            lengthscale_factor=params["lengthscale_factor"],
        )
    if name == "ncgp":
        return fit_ncgp(
            train,
            subsample_fraction=params["subsample_fraction"],
            noise_scale=params["noise_scale"],
            seed=seed,
            noise_var=params["noise_var"],
            pseudo_noise_var=params["pseudo_noise_var"],
        )
    if name == "pca":
        return fit_pca_trunc(train, variance_threshold=params["variance_threshold"])
    if name == "autoassoc":
        return fit_autoassoc(train, seed=seed)
    if name == "md_aa":
        return fit_md_aa(train, fit_autoassoc(train, seed=seed))
    if name == "aa_gp":
        return fit_aa_gp(
            train,
            subsample_fraction=params["subsample_fraction"],
            seed=seed,
            noise_var=params["noise_var"],
            lengthscale_factor=params["lengthscale_factor"],
        )
    raise ValueError(f"unknown detector {name!r}")


def _maybe_weight(synth, train, spec, params):
    if params.get("weighted"):
        return weight_synthesised_set(train, synth, spec, space=params.get("weight_space"))
    return synth


def build_synthesiser(
    name: str, spec: ToySpec, train: Dataset, valid: Dataset, seed: int, params: dict
):
    """Returns (synthesised set, supervised detector)."""
    n_ood = params.get("n_ood")
    if name == "uniform":
        synth = sample_uniform_ood(train, n_ood or len(train), seed=derive_seed(seed, "synth"))
        synth = _maybe_weight(synth, train, spec, params)
        return synth, train_supervised(train, synth, seed=derive_seed(seed, "train"))
    if name in ("fgsm_constant", "fgsm_uniform"):
        cfg = SynthesisConfig(
            method=name,
            n_ood=n_ood,
            step=params.get("step", 1.0),
            step_lo=params.get("step_lo", 0.0),
            step_hi=params.get("step_hi", 1.0),
            kde_bandwidth=params.get("kde_bandwidth"),
            seed=derive_seed(seed, "synth"),
        )
        synth = synthesise_fgsm(train, spec, cfg)
        synth = _maybe_weight(synth, train, spec, params)
        return synth, train_supervised(train, synth, seed=derive_seed(seed, "train"))
    if name == "fgsm_tpoke":
        initial = TPokeState(
            t=params["initial_t"],
            backoff_factor=params["backoff_factor"],
            poke_factor=params["poke_factor"],
            anneal_rate=params["anneal_rate"],
            criterion_threshold=params["criterion_threshold"],
        )
        state, det = tpoke(
            train,
            valid,
            spec,
            initial,
            max_cycles=params["max_cycles"],
            seed=seed,
            n_ood=n_ood,
            kde_bandwidth=params["kde_bandwidth"],
            step_mode=params["step_mode"],
        )
        synth = _tpoke_synth_set(state, spec, train, params, seed)
        return synth, det
    raise ValueError(f"unknown synthesiser {name!r}")


def _tpoke_synth_set(state: TPokeState, spec, train, params, seed):
    """Re-synthesise the OOD set of the cycle whose detector was returned
    (the last criterion-passing cycle, else the last cycle)."""
    passing = [i for i, (_, ok, _) in enumerate(state.history) if ok]
    cycle = passing[-1] if passing else len(state.history) - 1
    t = state.history[cycle][0]
    method = "fgsm_constant" if params["step_mode"] == "constant" else "fgsm_uniform"
    cfg = SynthesisConfig(
        method=method,
        n_ood=params.get("n_ood"),
        step=t,
        step_lo=0.0,
        step_hi=t,
        kde_bandwidth=params["kde_bandwidth"],
        seed=derive_seed(seed, "tpoke", cycle),
    )
    return synthesise_fgsm(train, spec, cfg)
