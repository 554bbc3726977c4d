"""End-to-end optimization: init, multistart, refinement, benchmarks.

A run builds the 20-column coarse design, searches over random restarts,
then alternates error-driven face splitting with short optimization
segments. Everything is driven by one seed; per-start generators are
derived through numpy SeedSequence spawn keys so results do not depend on
execution order and the best-of-n objective is prefix-monotone in n.
"""

import time
from dataclasses import dataclass, field

import numpy as np

from .accel import ExtrapolationKind, ExtrapolationState, wrap_step
from .design import (
    CachedProducts,
    DesignMatrix,
    bump_column,
    initial_design,
    local_error,
    precompute,
    refine,
)
from .errors import ConfigError, DataShapeError, DivergenceError, MultistartError
from .icosphere import face_centers
from .schemes import (
    FactorState,
    SchemeKind,
    objective,
    spectral_norm,
    step_dl,
    step_pnnmf,
    step_ppnmf,
    step_spnnmf,
)

# Per-scheme sparsity defaults; PNNMF resolves to 1/||L||_2 at run time.
DEFAULT_LAMBDA = {SchemeKind.DL: 5.0, SchemeKind.SPNNMF: 0.5, SchemeKind.PPNMF: 0.0}


@dataclass
class SchemeConfig:
    """Full description of one factorization run."""

    kind: SchemeKind
    data_level: int
    n_d: int
    lam: float | None = None  # None -> scheme default
    extrapolation: ExtrapolationKind = ExtrapolationKind.NONE
    warmup: int | None = None  # None -> 10 for log, else 0
    multistart_count: int = 50
    multistart_iters: int = 200
    refine_rounds: int = 0
    faces_per_round: int = 5
    iters_per_round: int = 10
    seed: int = 0
    sigma0: float = 0.25  # root column width; covers the sphere with 20 columns
    tau: float = 3.0

    def __post_init__(self):
        self.kind = SchemeKind(self.kind)
        self.extrapolation = ExtrapolationKind(self.extrapolation)
        for name in ("n_d", "multistart_count", "multistart_iters",
                     "faces_per_round", "iters_per_round"):
            if getattr(self, name) < 1:
                raise ConfigError(f"{name} must be >= 1, got {getattr(self, name)}")
        if self.refine_rounds < 0:
            raise ConfigError(f"refine_rounds must be >= 0, got {self.refine_rounds}")
        if self.data_level < 0:
            raise ConfigError(f"data_level must be >= 0, got {self.data_level}")
        if self.lam is not None and self.lam < 0:
            raise ConfigError(f"lambda must be >= 0, got {self.lam}")
        if self.sigma0 <= 0 or self.tau <= 0:
            raise ConfigError("sigma0 and tau must be positive")


@dataclass
class RunResult:
    """Everything one run produced, ready for serialization."""

    objective_trace: np.ndarray
    timings: np.ndarray
    refinement_log: list
    sparsity: tuple
    factors: FactorState
    design: DesignMatrix
    initial_objective: float
    final_objective: float
    lam: float
    eta: float | None
    best_start: int
    config: SchemeConfig = field(repr=False)

    def to_json_dict(self):
        cfg = self.config
        return {
            "scheme": cfg.kind.value,
            "lambda": self.lam,
            "eta": self.eta,
            "extrapolation": cfg.extrapolation.value,
            "warmup": cfg.warmup,
            "seed": cfg.seed,
            "data_level": cfg.data_level,
            "n_d": cfg.n_d,
            "sigma0": cfg.sigma0,
            "tau": cfg.tau,
            "n_k_final": self.design.n_k,
            "multistart": {
                "count": cfg.multistart_count,
                "iters": cfg.multistart_iters,
                "best_start": self.best_start,
            },
            "initial_objective": self.initial_objective,
            "final_objective": self.final_objective,
            "objective_trace": [float(v) for v in self.objective_trace],
            "timings": [float(v) for v in self.timings],
            "refinement_log": [
                {
                    "round": entry["round"],
                    "split": [[lvl, fid] for lvl, fid in entry["split"]],
                    "skipped": [[lvl, fid] for lvl, fid in entry["skipped"]],
                }
                for entry in self.refinement_log
            ],
            "sparsity": {"l1_B": self.sparsity[0], "l1_C": self.sparsity[1]},
        }


def resolve_lambda(kind, lam, L):
    """Fill in the scheme default; PNNMF uses 1/||L||_2 at the coarse design."""
    if lam is not None:
        return float(lam)
    if kind is SchemeKind.PNNMF:
        sigma = spectral_norm(L)
        if sigma == 0.0:
            raise DataShapeError("cannot derive lambda: L is zero")
        return 1.0 / sigma
    return DEFAULT_LAMBDA[kind]


def resolve_eta(L):
    """PALM step size 0.1 / ||L||_2 (spectral norm by power iteration)."""
    sigma = spectral_norm(L)
    if sigma == 0.0:
        raise DataShapeError("cannot derive step size: L is zero")
    return 0.1 / sigma


def make_step(kind, cp, lam, eta):
    """Bind one scheme update into a state -> state closure."""
    kind = SchemeKind(kind)
    if kind is SchemeKind.DL:
        return lambda s: step_dl(s, cp, lam, eta)
    if kind is SchemeKind.PNNMF:
        return lambda s: step_pnnmf(s, cp, lam)
    if kind is SchemeKind.SPNNMF:
        return lambda s: step_spnnmf(s, cp, lam)
    return lambda s: step_ppnmf(s, cp)


def init_factors(kind, rng, cp, n_d):
    """Draw the initial factors for one start.

    DL samples both factors from N(0,1). PPNMF takes |N(0,1)| scaled by
    1/||L||_F. The NMF schemes set C uniform at 1/n_d and build each B
    column as the average of five random columns of L^T (clamped at 0),
    so the basis starts on the data.
    """
    kind = SchemeKind(kind)
    n_s, n_k = cp.L.shape
    if kind is SchemeKind.DL:
        B = rng.standard_normal((n_k, n_d))
        C = rng.standard_normal((n_d, n_s))
        return FactorState(B, C)
    if kind is SchemeKind.PPNMF:
        B = np.abs(rng.standard_normal((n_k, n_d))) / np.linalg.norm(cp.L)
        return FactorState(B, None)
    C = np.full((n_d, n_s), 1.0 / n_d)
    picks = rng.integers(0, n_s, size=(n_d, 5))
    B = np.empty((n_k, n_d))
    for d in range(n_d):
        B[:, d] = np.maximum(cp.L[picks[d]].mean(axis=0), 0.0)
    return FactorState(B, C)


def _start_rng(seed, start_index):
    return np.random.default_rng(
        np.random.SeedSequence(entropy=seed, spawn_key=(start_index,))
    )


def _optimize(step, state, kind, cp, lam, x_norm_sq, iters):
    trace = np.empty(iters)
    times = np.empty(iters)
    for t in range(iters):
        t0 = time.perf_counter()
        state = step(state)
        times[t] = time.perf_counter() - t0
        trace[t] = objective(kind, state, cp, lam, x_norm_sq)
    return state, trace, times


def _multistart(config, cp, x_norm_sq, lam, eta):
    best = None
    reports = []
    for i in range(config.multistart_count):
        rng = _start_rng(config.seed, i)
        state = init_factors(config.kind, rng, cp, config.n_d)
        init_obj = objective(config.kind, state, cp, lam, x_norm_sq)
        ex = ExtrapolationState.create(config.extrapolation, config.warmup)
        step = wrap_step(make_step(config.kind, cp, lam, eta), ex, config.kind)
        try:
            state, trace, times = _optimize(
                step, state, config.kind, cp, lam, x_norm_sq, config.multistart_iters
            )
        except DivergenceError as err:
            reports.append(err)
            continue
        if best is None or trace[-1] < best[1][-1]:
            best = (state, trace, times, i, init_obj)
    if best is None:
        raise MultistartError(reports)
    return best


def multistart(config, X, D):
    """Best factor state over independently seeded random restarts."""
    cp = precompute(X, D)
    x_norm_sq = float(np.vdot(X, X))
    lam = resolve_lambda(config.kind, config.lam, cp.L)
    eta = resolve_eta(cp.L) if config.kind is SchemeKind.DL else None
    state, _, _, _, _ = _multistart(config, cp, x_norm_sq, lam, eta)
    return state


def run(config, X, hier):
    """Full pipeline: coarse design, multistart, error-driven refinement."""
    X = np.asarray(X, dtype=np.float64)
    if hier.max_level < config.data_level:
        raise ConfigError(
            f"hierarchy reaches level {hier.max_level}, config wants {config.data_level}"
        )
    expected = hier.mesh(config.data_level).n_faces
    if X.shape[0] != expected:
        raise DataShapeError(
            f"data has {X.shape[0]} rows, level-{config.data_level} mesh has "
            f"{expected} faces"
        )
    if (X < 0).any():
        raise DataShapeError("data matrix must be nonnegative")

    D = initial_design(hier, config.data_level, config.sigma0, config.tau)
    cp = precompute(X, D)
    x_norm_sq = float(np.vdot(X, X))
    # lambda and eta are fixed at the coarse design and held through refinement
    lam = resolve_lambda(config.kind, config.lam, cp.L)
    eta = resolve_eta(cp.L) if config.kind is SchemeKind.DL else None

    state, trace, times, best_start, initial_obj = _multistart(
        config, cp, x_norm_sq, lam, eta
    )
    traces = [trace]
    timings = [times]
    log = []
    for round_no in range(1, config.refine_rounds + 1):
        C_eff = state.C if config.kind.has_loadings else state.implicit_C(cp)
        e = local_error(cp, state.B, C_eff)
        D, B, cp, record = refine(D, state.B, cp, X, e, config.faces_per_round)
        state = FactorState(B, state.C, state.iteration)
        log.append(
            {"round": round_no, "split": record.split, "skipped": record.skipped}
        )
        # factor shapes changed: extrapolation memory restarts for the segment
        ex = ExtrapolationState.create(config.extrapolation, config.warmup)
        step = wrap_step(make_step(config.kind, cp, lam, eta), ex, config.kind)
        state, seg_trace, seg_times = _optimize(
            step, state, config.kind, cp, lam, x_norm_sq, config.iters_per_round
        )
        traces.append(seg_trace)
        timings.append(seg_times)

    C_eff = state.C if config.kind.has_loadings else state.implicit_C(cp)
    full_trace = np.concatenate(traces)
    return RunResult(
        objective_trace=full_trace,
        timings=np.concatenate(timings),
        refinement_log=log,
        sparsity=sparsity_report(state.B, C_eff),
        factors=state,
        design=D,
        initial_objective=initial_obj,
        final_objective=float(full_trace[-1]),
        lam=lam,
        eta=eta,
        best_start=best_start,
        config=config,
    )


def _median_step_time(step, state, warmup, iters):
    for _ in range(warmup):
        state = step(state)
    times = np.empty(iters)
    for t in range(iters):
        t0 = time.perf_counter()
        state = step(state)
        times[t] = time.perf_counter() - t0
    return float(np.median(times))


def coarse_iteration_time(config, X, hier, warmup=100, iters=1000):
    """Median wall-clock seconds per step at the 20-column coarse design."""
    X = np.asarray(X, dtype=np.float64)
    D = initial_design(hier, config.data_level, config.sigma0, config.tau)
    cp = precompute(X, D)
    lam = resolve_lambda(config.kind, config.lam, cp.L)
    eta = resolve_eta(cp.L) if config.kind is SchemeKind.DL else None
    state = init_factors(config.kind, _start_rng(config.seed, 0), cp, config.n_d)
    ex = ExtrapolationState.create(config.extrapolation, config.warmup)
    step = wrap_step(make_step(config.kind, cp, lam, eta), ex, config.kind)
    return _median_step_time(step, state, warmup, iters)


def fine_iteration_time(config, X, hier, warmup=1, iters=3):
    """Median seconds per step with D = identity at the data resolution.

    K is the dense n_f x n_f identity (M = X X^T is built only for PPNMF,
    which is the only scheme that reads it), so every step pays the full
    data-dimension matrix products the reduction avoids.
    """
    X = np.asarray(X, dtype=np.float64)
    n_f = X.shape[0]
    L = np.ascontiguousarray(X.T)
    K = np.eye(n_f)
    M = L.T @ L if config.kind is SchemeKind.PPNMF else None
    cp = CachedProducts(K, L, M)
    lam = resolve_lambda(config.kind, config.lam, cp.L)
    eta = resolve_eta(cp.L) if config.kind is SchemeKind.DL else None
    state = init_factors(config.kind, _start_rng(config.seed, 0), cp, config.n_d)
    ex = ExtrapolationState.create(config.extrapolation, config.warmup)
    step = wrap_step(make_step(config.kind, cp, lam, eta), ex, config.kind)
    return _median_step_time(step, state, warmup, iters)


def benchmark_iteration_time(config, X, hier, coarse_warmup=100, coarse_iters=1000,
                             fine_warmup=1, fine_iters=3):
    """(coarse_time, fine_time, speedup) per-iteration timing comparison."""
    coarse = coarse_iteration_time(config, X, hier, coarse_warmup, coarse_iters)
    fine = fine_iteration_time(config, X, hier, fine_warmup, fine_iters)
    return coarse, fine, fine / coarse


def sparsity_report(B, C):
    """Entrywise absolute sums (||B||_1, ||C||_1)."""
    return float(np.abs(B).sum()), float(np.abs(C).sum())


def method_label(kind, ex_kind):
    """Conventional method name: E- prefixes standard, LE- the log variant."""
    base = SchemeKind(kind).value.upper()
    prefix = {
        ExtrapolationKind.NONE: "",
        ExtrapolationKind.STANDARD: "E-",
        ExtrapolationKind.LOG: "LE-",
    }[ExtrapolationKind(ex_kind)]
    return prefix + base


def extrapolation_comparison(config, X, hier, reps=10):
    """Median objective trace per (scheme x extrapolation) combination.

    Runs `reps` seeded repetitions of `config.multistart_iters` iterations
    at the coarse design for each of the eleven applicable combinations
    (log extrapolation is undefined for DL). Repetition r of every method
    shares the same initialization stream, so curves are directly
    comparable. Returns an ordered {label: median trace} dict.
    """
    X = np.asarray(X, dtype=np.float64)
    D = initial_design(hier, config.data_level, config.sigma0, config.tau)
    cp = precompute(X, D)
    x_norm_sq = float(np.vdot(X, X))
    eta = resolve_eta(cp.L)
    results = {}
    for kind in SchemeKind:
        lam = resolve_lambda(kind, config.lam, cp.L)
        for ex_kind in ExtrapolationKind:
            if kind is SchemeKind.DL and ex_kind is ExtrapolationKind.LOG:
                continue
            traces = np.empty((reps, config.multistart_iters))
            for rep in range(reps):
                rng = _start_rng(config.seed, rep)
                state = init_factors(kind, rng, cp, config.n_d)
                ex = ExtrapolationState.create(ex_kind, config.warmup)
                step = wrap_step(make_step(kind, cp, lam, eta), ex, kind)
                _, traces[rep], _ = _optimize(
                    step, state, kind, cp, lam, x_norm_sq, config.multistart_iters
                )
            results[method_label(kind, ex_kind)] = np.median(traces, axis=0)
    return results


def synth_data(hier, data_level, n_s, n_sources, noise_sigma, seed):
    """Synthetic positive surface data from planted bump sources.

    Columns of F are bumps at random sphere points with widths drawn from
    [0.02, 0.08], evaluated at the data-level face centers; X = F C* plus
    optional Gaussian noise, clamped at zero. Returns (X, F, C*) so tests
    can score recovery against the ground truth.
    """
    if n_sources < 1:
        raise ConfigError(f"n_sources must be >= 1, got {n_sources}")
    if noise_sigma < 0:
        raise ConfigError(f"noise_sigma must be >= 0, got {noise_sigma}")
    rng = np.random.default_rng(seed)
    points = face_centers(hier.mesh(data_level))
    centers = rng.standard_normal((n_sources, 3))
    centers /= np.linalg.norm(centers, axis=1, keepdims=True)
    sigmas = rng.uniform(0.02, 0.08, n_sources)
    F = np.column_stack(
        [bump_column(centers[j], sigmas[j], 3.0, points) for j in range(n_sources)]
    )
    C_star = rng.uniform(0.0, 1.0, (n_sources, n_s))
    X = F @ C_star
    if noise_sigma > 0:
        X = X + noise_sigma * rng.standard_normal(X.shape)
    return np.maximum(X, 0.0), F, C_star
