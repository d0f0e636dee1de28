"""Experiment registry and the batch runner behind ``horseshoe-thermo run``.

Each experiment reads a resolved RunConfig, writes its tables and plots into
the output directory and returns the verdicts it reached. ``run`` turns those
verdicts into an exit code and writes ``manifest.json`` last.
"""

import dataclasses
import itertools
import logging
import math
from collections.abc import Callable
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from horseshoe_thermo.certificates import (
    AdmissibleFamily,
    check_C1,
    check_C2,
    check_D1,
    check_D2,
    markov_pressure_bracket,
    sup_at_Q_check,
    sup_bracket,
    t_interval,
)
from horseshoe_thermo.config import ExperimentKind, RunConfig
from horseshoe_thermo.countable import (
    Verdict,
    c_alpha,
    exponential_tail_check,
    gibbs_approx,
    gurevich_pressure,
    positive_recurrence_check,
    summability_eq8,
)
from horseshoe_thermo.errors import (
    ConfigError,
    DomainError,
    EscapeError,
    HorseshoeError,
    InsufficientSignal,
    NotFoundError,
)
from horseshoe_thermo.expansion import (
    OrbitRecord,
    central_lyapunov,
    detect_phase_transition,
    dynamical_orbit,
    frequency_d,
    pliss_lower_bound,
    pressure_curve,
    random_admissible_word,
    sensitivity_scan,
)
from horseshoe_thermo.inducing import (
    FiniteShiftMeasure,
    build_induced_table,
    build_tower,
    kac_abramov_check,
    liftability_scan,
)
from horseshoe_thermo.maps import (
    apply_F,
    apply_F_inv,
    apply_G,
    apply_pi,
    in_horseshoe_domain,
    sample_domain_points,
)
from horseshoe_thermo.measures import (
    LOG_OMEGA,
    central_exponent_scan,
    correlation_decay,
    delta_P,
    delta_Q,
    markov_equilibrium,
    max_entropy_measure,
    periodic_measure,
    pressure_equality_check,
    pushforward_pi,
    topological_entropy_estimate,
)
from horseshoe_thermo.output import emit_plot, to_jsonable, write_csv, write_json
from horseshoe_thermo.potentials import (
    PotentialSpec,
    add_constant,
    birkhoff_average_potential,
    build_potential,
    central_potential,
    coordinate_potential,
    planar_grid,
    projective_example,
)
from horseshoe_thermo.symbolic import (
    alphabet,
    block_decompose,
    count_admissible,
    enumerate_level,
    itinerary,
    level_counts,
    m_of_c0,
    orbit_from_itinerary,
    short_block_bound,
)

logger = logging.getLogger(__name__)

EXIT_OK = 0
EXIT_ERROR = 1
EXIT_INCONCLUSIVE = 2
EXIT_CONFIG = 3

MANIFEST = "manifest.json"

# (the pass/fail tolerances of the experiment verdicts)
_ENTROPY_TOL = 1e-3
_EXPONENT_TOL = 1e-9
_SEMICONJUGACY_TOL = 1e-12
_KAC_TOL = 1e-12
_ENTROPY_REL_TOL = 0.05
_PHASE_SPREAD = 0.2
_PHASE_MIN_JUMP = 0.5


def _decided(ok: bool) -> Verdict:
    return Verdict.HOLDS if ok else Verdict.FAILS


def _settled(ok: bool) -> Verdict:
    return Verdict.HOLDS if ok else Verdict.INCONCLUSIVE


# ── Results and context ──


@dataclass
class ExperimentResult:
    """Outcome of one experiment.

    Attributes:
        name: Experiment name.
        verdicts: Named three-valued outcomes.
        summary: Headline numbers, echoed into the manifest.
        artifacts: Files written, in order.
    """

    name: str
    verdicts: dict[str, Verdict] = field(default_factory=dict)
    summary: dict = field(default_factory=dict)
    artifacts: list[Path] = field(default_factory=list)

    @property
    def exit_code(self) -> int:
        if any(v is Verdict.INCONCLUSIVE for v in self.verdicts.values()):
            return EXIT_INCONCLUSIVE
        return EXIT_OK


class RunContext:
    """Resolved inputs plus artifact bookkeeping for one experiment."""

    def __init__(self, config: RunConfig, name: str) -> None:
        self.config = config
        self.params = config.map_params
        self.truncations = config.truncations
        self.out_dir = Path(config.output_dir)
        self.seed = config.seed
        self.rng = np.random.default_rng(config.seed)
        self.result = ExperimentResult(name=name)

    def csv(self, name: str, header: list[str], rows: list[list]) -> None:
        self.result.artifacts.append(write_csv(self.out_dir / name, header, rows))

    def json(self, name: str, payload) -> None:
        self.result.artifacts.append(write_json(self.out_dir / name, payload))

    def plot(self, name: str, x, series: dict, kind: str = "line", **labels: str) -> None:
        self.result.artifacts.append(emit_plot(self.out_dir / name, x, series, kind, **labels))

    def verdict(self, key: str, value: Verdict) -> None:
        self.result.verdicts[key] = value
        logger.info("%s: %s", key, value.value)


@dataclass(frozen=True)
class Experiment:
    """A registered experiment."""

    kind: ExperimentKind
    description: str
    runner: Callable[[RunContext], None]


EXPERIMENTS: dict[ExperimentKind, Experiment] = {}


def register(kind: ExperimentKind, description: str):
    def decorator(fn: Callable[[RunContext], None]) -> Callable[[RunContext], None]:
        EXPERIMENTS[kind] = Experiment(kind, description, fn)
        return fn

    return decorator


# ── Entropy and central exponents ──


@register(ExperimentKind.ENTROPY, "Topological entropy and central exponents of periodic measures")
def _entropy(ctx: RunContext) -> None:
    report = topological_entropy_estimate(30)
    scan = central_exponent_scan(10, ctx.params)
    lam_q = central_lyapunov(delta_Q(), ctx.params)
    lam_p = central_lyapunov(delta_P(), ctx.params)

    counts = [count_admissible(n) for n in range(1, 31)]
    growth = [math.nan] + [math.log(b / a) for a, b in itertools.pairwise(counts)]
    ctx.csv(
        "word_counts.csv",
        ["n", "count", "log_ratio"],
        [[n, c, g] for n, c, g in zip(range(1, 31), counts, growth, strict=True)],
    )
    ctx.csv(
        "central_exponents.csv",
        ["cycle", "period", "exponent"],
        [[cycle, len(cycle), value] for cycle, value in scan],
    )
    negative = all(value < 0.0 for cycle, value in scan if "1" in cycle)
    ctx.json(
        "entropy.json",
        {
            "spectral": report.spectral,
            "count_growth": report.h_estimate,
            "naive": report.naive,
            "n_used": report.n_used,
            "method": report.method,
            "abs_err": abs(report.h_estimate - report.spectral),
            "lambda_c_Q": lam_q,
            "lambda_c_P": lam_p,
            "periodic_measures": len(scan),
            "negative_with_a_one": negative,
        },
    )
    ctx.plot(
        "word_counts.svg",
        list(range(2, 31)),
        {"log N_n/N_(n-1)": growth[1:], "log omega": [LOG_OMEGA] * 29},
        title="Word-count growth",
        xlabel="n",
        ylabel="entropy estimate",
    )
    ctx.plot(
        "central_exponents.svg",
        [len(cycle) for cycle, _ in scan],
        {"lambda_c": [value for _, value in scan]},
        kind="scatter",
        title="Central exponents of periodic measures",
        xlabel="period",
        ylabel="exponent",
    )
    ctx.result.summary = {"spectral": report.spectral, "count_growth": report.h_estimate}
    ctx.verdict("count_growth", _settled(abs(report.h_estimate - report.spectral) < _ENTROPY_TOL))
    exponents_ok = abs(lam_q - 1.0) < _EXPONENT_TOL and abs(lam_p + 1.0) < _EXPONENT_TOL
    ctx.verdict("fixed_point_exponents", _decided(exponents_ok))
    ctx.verdict("negative_exponents", _decided(negative))


# ── Pressure curve and phase transition ──


def _t_grid(ctx: RunContext) -> list[float]:
    scan = ctx.config.scan
    return np.linspace(scan.t_min, scan.t_max, scan.t_steps).tolist()


@register(ExperimentKind.PRESSURE_CURVE, "P̂(t) = max(t, hyperbolic branch) on a t grid")
def _pressure_curve(ctx: RunContext) -> None:
    L = ctx.truncations.L
    curve = pressure_curve(_t_grid(ctx), L, ctx.params, ctx.config.threads)
    rows = curve.rows()
    ctx.csv(
        "pressure_curve.csv",
        ["t", "branch_Q", "branch_hyp", "P_hat"],
        [[r["t"], r["branch_Q"], r["branch_hyp"], r["P_hat"]] for r in rows],
    )
    p_hat = curve.p_hat
    convex = bool(np.all(np.diff(p_hat, 2) >= -1e-9)) if len(p_hat) > 2 else True
    above = bool(np.all(p_hat >= curve.t - 1e-12))
    ctx.json("pressure_curve.json", {"L": L, "convex": convex, "above_t": above})
    ctx.plot(
        "pressure_curve.svg",
        curve.t,
        {"t (delta_Q)": curve.branch_Q, "hyperbolic": curve.branch_hyp, "P_hat": p_hat},
        title=f"Pressure of t log|DF|E^c| (L={L})",
        xlabel="t",
        ylabel="pressure",
    )
    ctx.result.summary = {"L": L, "points": len(rows)}
    ctx.verdict("convex", _decided(convex))
    ctx.verdict("above_t", _decided(above))


@register(ExperimentKind.PHASE_SCAN, "Crossing t0 of the pressure branches across block lengths")
def _phase_scan(ctx: RunContext) -> None:
    grid = _t_grid(ctx)
    curve_rows, scan_rows, series, crossings = [], [], {}, []
    for L in ctx.config.scan.block_lengths:
        curve = pressure_curve(grid, L, ctx.params, ctx.config.threads)
        curve_rows += [
            [L, r["t"], r["branch_Q"], r["branch_hyp"], r["P_hat"]] for r in curve.rows()
        ]
        series[f"L={L}"] = curve.p_hat
        try:
            found = detect_phase_transition(curve)
        except NotFoundError as exc:
            logger.warning("No crossing at L=%d: %s", L, exc)
            scan_rows.append([L, math.nan, math.nan, math.nan, False])
            continue
        crossings.append(found)
        scan_rows.append([L, found.t0_hat, found.slope_jump, found.hyp_slope, True])

    ctx.csv("phase_curves.csv", ["L", "t", "branch_Q", "branch_hyp", "P_hat"], curve_rows)
    ctx.csv("phase_scan.csv", ["L", "t0_hat", "slope_jump", "hyp_slope", "found"], scan_rows)
    ctx.plot("phase_scan.svg", grid, series, title="P_hat by block length", xlabel="t")

    if len(crossings) < len(scan_rows):
        verdict, spread = Verdict.INCONCLUSIVE, math.nan
    else:
        t0s = np.array([c.t0_hat for c in crossings])
        spread = float((t0s.max() - t0s.min()) / t0s.mean()) if t0s.mean() > 0 else math.inf
        ok = (
            bool(np.all(t0s > 0.0))
            and all(c.slope_jump > _PHASE_MIN_JUMP for c in crossings)
            and spread < _PHASE_SPREAD
        )
        verdict = _settled(ok)
    ctx.json(
        "phase_scan.json",
        {"crossings": crossings, "relative_spread": spread, "block_lengths": list(series)},
    )
    ctx.result.summary = {"t0_hat": [c.t0_hat for c in crossings], "relative_spread": spread}
    ctx.verdict("phase_transition", verdict)


# ── Inducing scheme ──


@register(ExperimentKind.INDUCE_STATS, "Level counts, block identities, c(alpha) and liftability")
def _induce_stats(ctx: RunContext) -> None:
    inducing = ctx.config.inducing
    alpha = inducing.alpha
    cap = ctx.truncations.enumeration_cap
    counts = level_counts(cap, alpha, cap)
    c = c_alpha(alpha, 2000)

    identity_ok = True
    bound_ok = True
    source_failures = 0
    checked = 0
    for i in range(2, min(18, cap) + 1):
        for cyl in enumerate_level(i, alpha, cap):
            dec = block_decompose(cyl.word)
            identity_ok &= dec.identity_value() == i
            short = short_block_bound(dec, inducing)
            bound_ok &= short.corrected_holds
            source_failures += not short.source_holds
            checked += 1

    tower = build_tower(ctx.truncations.K, alpha, cap)
    L = ctx.truncations.L
    mu_max = max_entropy_measure(L, ctx.params)
    mu_one = float(
        sum(w for b, w in zip(mu_max.blocks, mu_max.weights, strict=True) if b[L // 2] == "1")
    )
    best, reports = liftability_scan(mu_one, "1", alpha, cap=min(16, cap))

    levels = sorted(counts)
    ctx.csv(
        "level_counts.csv",
        ["level", "r", "log_r_over_level"],
        [[i, counts[i], math.log(counts[i]) / i if counts[i] else math.nan] for i in levels],
    )
    ctx.csv(
        "liftability.csv",
        ["N", "sup_e", "argmax_level", "tail_bound", "margin", "passes", "certified"],
        [
            [r.N, r.sup_e, r.argmax_level, r.tail_bound, r.margin, r.passes_truncated, r.certified]
            for r in reports
        ],
    )
    ctx.json(
        "induce_stats.json",
        {
            "alpha": alpha,
            "tau": inducing.tau,
            "N": inducing.N,
            "c_alpha": c,
            "words_checked": checked,
            "identity_holds": identity_ok,
            "corrected_bound_holds": bound_ok,
            "source_bound_failures": source_failures,
            "tower_floors": len(tower.floors()),
            "mu_one": mu_one,
            "liftability": best,
        },
    )
    ctx.plot(
        "level_counts.svg",
        levels,
        {
            "log r_i": [math.log(counts[i]) if counts[i] else math.nan for i in levels],
            "c(alpha) i": [c * i for i in levels],
        },
        kind="scatter",
        title=f"Level counts at alpha={alpha:g}",
        xlabel="level i",
    )
    ctx.result.summary = {"c_alpha": c, "words_checked": checked, "margin": best.margin}
    ctx.verdict("level_identity", _decided(identity_ok))
    ctx.verdict("short_block_bound", _decided(bound_ok))
    if not best.passes_truncated:
        ctx.verdict("liftability", Verdict.FAILS)
    else:
        ctx.verdict("liftability", _settled(best.certified))


# ── Countable-shift thermodynamics ──


@register(ExperimentKind.GIBBS, "Gurevich pressure, Gibbs measure and recurrence")
def _gibbs(ctx: RunContext) -> None:
    params, tr = ctx.params, ctx.truncations
    phi = build_potential(ctx.config.potential, params)
    alpha = ctx.config.inducing.alpha
    K = tr.K
    Ks = sorted({max(2, K - 2), K, min(tr.enumeration_cap, K + 2)})
    logger.info("Induced table of %s up to K=%d (seed %d)", phi.label, Ks[-1], ctx.seed)
    table = build_induced_table(
        phi, Ks[-1], alpha, params, depth=tr.depth, seed=ctx.seed, cap=tr.enumeration_cap
    )

    bases = list(table.restricted(K).symbols[:3])
    brackets = [gurevich_pressure(table, K, base=b, n_max=tr.n_max) for b in bases]
    overlap = all(a.overlaps(b) for a, b in itertools.combinations(brackets, 2))
    g = gibbs_approx(table, K, tr.n_max)
    agreement = abs(g.log_pressure - g.pressure.point)
    constants = {k: gibbs_approx(table, k, tr.n_max).gibbs_constant for k in Ks}
    stable = max(constants.values()) <= 2.0 * min(constants.values())
    tail = exponential_tail_check(g)

    measure, pressure = markov_equilibrium(phi, tr.L, params)
    sup_phi = sup_bracket(phi, 1, params)[1]
    eps = max(1e-3, (pressure - sup_phi) / 2.0)
    eq8 = summability_eq8(table, eps, K, pressure)
    recurrence = positive_recurrence_check(table, eps, K, p_shift=pressure)
    try:
        corr = correlation_decay(measure, phi, phi, 20, max(2000, 100 * tr.samples), ctx.seed)
        corr_verdict = _settled(corr.theta < 1.0)
    except InsufficientSignal as exc:
        logger.warning("Correlation fit skipped: %s", exc)
        corr, corr_verdict = None, Verdict.INCONCLUSIVE

    ctx.csv(
        "gibbs_masses.csv",
        ["level", "word", "mass"],
        [[r["level"], r["word"], r["mass"]] for r in g.rows()],
    )
    if corr is not None:
        ctx.csv(
            "correlations.csv",
            ["lag", "covariance", "std_error"],
            [
                [int(n), c, e]
                for n, c, e in zip(corr.lags, corr.correlations, corr.std_errors, strict=True)
            ],
        )
    ctx.json(
        "gibbs.json",
        {
            "potential": phi.label,
            "K": K,
            "brackets": [
                {"base": b.base.word, "lower": b.lower, "upper": b.upper, "point": b.point}
                for b in brackets
            ],
            "brackets_overlap": overlap,
            "gibbs_pressure": g.log_pressure,
            "pressure_agreement": agreement,
            "eigen_gap": g.eigen.gap,
            "gibbs_constants": constants,
            "tail": {"C": tail.C, "theta": tail.theta},
            "markov_pressure": pressure,
            "eps": eps,
            "eq8": eq8,
            "recurrence": recurrence,
            "correlation": None if corr is None else {"K": corr.K, "theta": corr.theta},
        },
    )
    masses = g.level_masses()
    ctx.plot(
        "gibbs_levels.svg",
        sorted(masses),
        {"log mass": [math.log(masses[k]) for k in sorted(masses)]},
        kind="scatter",
        title=f"Gibbs mass per level (K={K})",
        xlabel="level",
    )
    ctx.result.summary = {"pressure": g.log_pressure, "theta": tail.theta, "gap": g.eigen.gap}
    ctx.verdict("base_independence", _decided(overlap))
    ctx.verdict("pressure_agreement", _decided(agreement < 1e-8))
    ctx.verdict("gibbs_constant_stable", _settled(stable))
    ctx.verdict("exponential_tail", _settled(tail.theta < 1.0))
    ctx.verdict("summability", eq8.verdict)
    ctx.verdict("positive_recurrence", recurrence.verdict)
    ctx.verdict("correlation_decay", corr_verdict)


# ── Certificates ──


@register(ExperimentKind.ADMISSIBLE_CHECK, "(C1)/(C2) certificates for the plateau family")
def _admissible_check(ctx: RunContext) -> None:
    params, tr, scan = ctx.params, ctx.truncations, ctx.config.scan
    family = AdmissibleFamily(scan.c0, scan.peak, scan.floor, scan.xi, scan.family_t)
    interval = t_interval(family, params, tr.L)
    m = m_of_c0(scan.c0, params)
    phi = family.potential
    spread = family.t * (scan.peak - scan.floor)

    c2 = check_C2(phi, 1, params, L=tr.L)
    logger.info("C1 fit with seed %d", ctx.seed)
    c1 = check_C1(
        phi, ctx.config.inducing.alpha, tr.K, params, tr.depth, tr.samples, seed=ctx.seed
    )

    normalization = []
    for n in range(2, 5):
        try:
            avg = check_C2(birkhoff_average_potential(phi, n, params), 1, params, L=tr.L)
            normalization.append([n, avg.verdict, avg.pressure_lower, avg.sup_upper])
        except DomainError as exc:
            logger.warning("phi_%d/%d left the domain: %s", n, n, exc)
            normalization.append([n, Verdict.INCONCLUSIVE, math.nan, math.nan])

    rows = []
    if interval.nonempty:
        for t in np.linspace(interval.t0, interval.t1_lower, 7)[1:-1].tolist():
            report = check_C2(dataclasses.replace(family, t=t).potential, 1, params, L=tr.L)
            rows.append([t, report.verdict, report.pressure_lower, report.sup_upper])
    else:
        rows.append([family.t, c2.verdict, c2.pressure_lower, c2.sup_upper])

    ctx.csv("c2_scan.csv", ["t", "verdict", "pressure_lower", "sup_upper"], rows)
    ctx.csv("c2_normalization.csv", ["n", "verdict", "pressure_lower", "sup_upper"], normalization)
    ctx.csv(
        "variation_profile.csv",
        ["k", "var_lower", "fitted"],
        [
            [int(k), v, c1.bound(int(k))]
            for k, v in zip(c1.k_values, c1.var_lower, strict=True)
        ],
    )
    ctx.json(
        "admissible.json",
        {
            "family": dataclasses.asdict(family),
            "interval": interval,
            "m_of_c0": m,
            "variation": spread,
            "C2": c2,
            "C1": {"C": c1.C, "a": c1.a, "r_squared": c1.r_squared, "certified": c1.certified},
        },
    )
    ctx.plot(
        "c2_scan.svg",
        [r[0] for r in rows],
        {"pressure lower": [r[2] for r in rows], "sup upper": [r[3] for r in rows]},
        title="(C2) across the admissible interval",
        xlabel="t",
    )
    ctx.plot(
        "variation_profile.svg",
        c1.k_values,
        {"Var_k": c1.var_lower},
        kind="scatter",
        title="Variations of the induced potential",
        xlabel="k",
    )
    ctx.result.summary = {"t0": interval.t0, "t1_lower": interval.t1_lower, "a": c1.a}
    ctx.verdict("interval_nonempty", _decided(interval.nonempty))
    ctx.verdict("not_small_variation", _decided(spread >= LOG_OMEGA / 2.0))
    ctx.verdict("C2", c2.verdict)
    ctx.verdict("C1", _settled(c1.certified) if phi.is_holder else Verdict.FAILS)


def _projective_inputs(ctx: RunContext) -> tuple[PotentialSpec, PotentialSpec]:
    spec = ctx.config.potential
    if spec.kind == "projective" and spec.u is not None:
        return build_potential(spec, ctx.params), build_potential(spec.u, ctx.params)
    # u with oscillation above h(G), v = u + 0.1
    u = coordinate_potential((0.0, 0.8, 0.0))
    return projective_example(u, add_constant(u, 0.1), ctx.params), u


@register(ExperimentKind.PROJECTIVE_CHECK, "(D1)/(D2), pressure equality and sup-at-Q on the plane")
def _projective_check(ctx: RunContext) -> None:
    params, L = ctx.params, ctx.truncations.L
    phi, u = _projective_inputs(ctx)
    d1 = check_D1(phi, u, params)
    d2 = check_D2(phi)
    equality = pressure_equality_check(phi, L, params)
    p_lower, p_upper = markov_pressure_bracket(phi, L, params)
    at_q = sup_at_Q_check(phi, p_lower, params)

    pushed = []
    for cycle in ("0", "01", "001", "0101001"):
        mu = periodic_measure(cycle, params)
        nu = pushforward_pi(mu, params)
        pushed.append([cycle, mu.integral(phi), nu.integral(phi)])
    push_gap = max(abs(a - b) for _, a, b in pushed)

    pts = planar_grid(params, 25)
    slack = phi.values(pts) - (u.values(pts) - u.values(apply_G(pts, params)))
    ctx.csv(
        "d1_slack.csv",
        ["x", "y", "z", "slack"],
        [[p[0], p[1], p[2], s] for p, s in zip(pts.tolist(), slack.tolist(), strict=True)],
    )
    ctx.csv("pushforward.csv", ["cycle", "integral_mu", "integral_nu"], pushed)
    ctx.json(
        "projective.json",
        {
            "potential": phi.label,
            "notes": phi.notes,
            "D1": d1,
            "D2": d2,
            "pressure_equality": equality,
            "pressure_bracket": [p_lower, p_upper],
            "sup_at_Q": at_q,
            "pushforward_gap": push_gap,
        },
    )
    ctx.plot(
        "d1_slack.svg",
        pts[:, 1],
        {"slack": slack},
        kind="scatter",
        title="phi - (u - u o G) on the planar grid",
        xlabel="y",
    )
    ctx.result.summary = {"min_slack": d1.min_slack, "margin": d2.margin}
    ctx.verdict("D1", _decided(d1.holds))
    ctx.verdict("D2", d2.verdict)
    ctx.verdict("pressure_equality", _decided(equality.difference <= 1e-9))
    ctx.verdict("pushforward", _decided(push_gap <= 1e-12))
    ctx.verdict("sup_at_Q", _decided(at_q.sup_at_Q and at_q.below_pressure))


# ── Hyperbolic times ──


def _synthetic_orbit(rng: np.random.Generator, length: int) -> OrbitRecord:
    steps = rng.uniform(-1.0, 3.0, length)
    return OrbitRecord(
        points=np.zeros((length + 1, 3)),
        log_min_expansion=steps,
        boundary_flags=np.zeros(length + 1, dtype=bool),
    )


@register(ExperimentKind.HYP_TIMES, "Hyperbolic-time frequencies against the Pliss bound")
def _hyp_times(ctx: RunContext) -> None:
    hyp = ctx.config.hyperbolic_times
    length = max(100, ctx.truncations.n_max)
    logger.info("Hyperbolic times on %d-step orbits (seed %d)", length, ctx.seed)
    rows = []
    held = {"dynamical": True, "synthetic": True}
    for j in range(100):
        record = dynamical_orbit(random_admissible_word(ctx.rng, length + 1), ctx.params, hyp)
        freq = frequency_d(record, hyp, exclude_boundary=False)
        bound = pliss_lower_bound(record, hyp)
        held["dynamical"] &= freq >= bound - 1e-12
        rows.append(["dynamical", j, freq, frequency_d(record, hyp), bound])
    for j in range(100):
        record = _synthetic_orbit(ctx.rng, length)
        freq = frequency_d(record, hyp, exclude_boundary=False)
        bound = pliss_lower_bound(record, hyp)
        held["synthetic"] &= freq >= bound - 1e-12
        rows.append(["synthetic", j, freq, math.nan, bound])

    sigmas = [0.2, 0.25, 1.0 / 3.0, 0.4, 0.5]
    sensitivity = sensitivity_scan(sigmas, ctx.params, hyp.eps_ball, seed=ctx.seed)
    ctx.csv("hyp_times.csv", ["kind", "orbit", "frequency", "frequency_excluded", "pliss"], rows)
    ctx.csv(
        "sensitivity.csv",
        ["sigma_h", "mean_frequency", "mean_pliss_bound", "orbits"],
        [[r.sigma_h, r.mean_frequency, r.mean_pliss_bound, r.orbits] for r in sensitivity],
    )
    dyn = [r for r in rows if r[0] == "dynamical"]
    ctx.json(
        "hyp_times.json",
        {
            "length": length,
            "sigma_h": hyp.sigma_h,
            "mean_dynamical_frequency": float(np.mean([r[2] for r in dyn])),
            "pliss_holds": held,
        },
    )
    ctx.plot(
        "hyp_times.svg",
        [r[1] for r in dyn],
        {"frequency": [r[2] for r in dyn], "Pliss bound": [r[4] for r in dyn]},
        kind="scatter",
        title="Hyperbolic-time frequency per orbit",
        xlabel="orbit",
    )
    ctx.plot(
        "sensitivity.svg",
        sigmas,
        {"frequency": [r.mean_frequency for r in sensitivity]},
        title="Frequency against sigma_h",
        xlabel="sigma_h",
    )
    ctx.result.summary = {"pliss_holds": held}
    ctx.verdict("pliss_dynamical", _decided(held["dynamical"]))
    ctx.verdict("pliss_synthetic", _decided(held["synthetic"]))


# ── Semiconjugacies ──


def _equivariant(word: str, ctx: RunContext, n: int = 10) -> bool:
    centre = len(word) // 2
    p = orbit_from_itinerary(word, ctx.params).points[centre]
    try:
        here = itinerary(p, n + 1, n, ctx.params)
        there = itinerary(apply_F(p, ctx.params)[0], n, n + 1, ctx.params)
    except EscapeError as exc:
        logger.debug("Orbit escaped at index %d", exc.index)
        return False
    return there.past == here.past + here.future[0] and there.future == here.future[1:]


@register(ExperimentKind.SEMICONJUGACY_TEST, "π∘F⁻¹ = G∘π and the itinerary shift")
def _semiconjugacy(ctx: RunContext) -> None:
    params = ctx.params
    logger.info("Semiconjugacy test on 10000 points (seed %d)", ctx.seed)
    images = apply_F(sample_domain_points(ctx.rng, 40_000), params)
    # F(R0 ∪ R1) leaves the slabs in places; π needs points inside them
    pts = images[in_horseshoe_domain(images)][:10_000]
    defects = np.abs(apply_pi(apply_F_inv(pts, params)) - apply_G(apply_pi(pts), params))
    per_point = defects.max(axis=1)
    worst = float(per_point.max())

    words = [random_admissible_word(ctx.rng, 41) for _ in range(100)]
    matches = [_equivariant(w, ctx) for w in words]

    ctx.csv(
        "semiconjugacy.csv",
        ["x", "y", "z", "defect"],
        [[p[0], p[1], p[2], d] for p, d in zip(pts.tolist(), per_point.tolist(), strict=True)],
    )
    ctx.json(
        "semiconjugacy.json",
        {
            "points": len(pts),
            "max_defect": worst,
            "orbits": len(words),
            "equivariant": sum(matches),
        },
    )
    ctx.plot(
        "semiconjugacy.svg",
        pts[:, 1],
        {"defect": per_point},
        kind="scatter",
        title="|π F⁻¹ − G π| per point",
        xlabel="y",
    )
    ctx.result.summary = {"max_defect": worst, "equivariant": sum(matches)}
    ctx.verdict("semiconjugacy", _decided(worst <= _SEMICONJUGACY_TOL))
    ctx.verdict("equivariance", _decided(all(matches)))


# ── Kač–Abramov ──


@register(ExperimentKind.KAC_ABRAMOV, "Lifted integrals and entropies against the induced ones")
def _kac_abramov(ctx: RunContext) -> None:
    params, tr = ctx.params, ctx.truncations
    cylinders = alphabet(tr.K, ctx.config.inducing.alpha, tr.enumeration_cap)
    logger.info("Kac-Abramov pairs over %d symbols (seed %d)", len(cylinders), ctx.seed)
    rows = []
    for j in range(50):
        size = int(ctx.rng.integers(1, min(6, len(cylinders)) + 1))
        chosen = sorted(ctx.rng.choice(len(cylinders), size=size, replace=False).tolist())
        nu = FiniteShiftMeasure.bernoulli(
            [cylinders[k] for k in chosen], ctx.rng.dirichlet(np.ones(size)).tolist()
        )
        if j % 2:
            phi = central_potential(params, float(ctx.rng.uniform(0.0, 2.0)))
        else:
            phi = coordinate_potential(tuple(ctx.rng.normal(size=3).tolist()))
        report = kac_abramov_check(nu, phi, params)
        rows.append([j, phi.label, report.integral_tau, report.lhs, report.rhs, report.abs_err])
    integral_ok = all(r[5] <= _KAC_TOL * max(1.0, abs(r[4])) for r in rows)

    uniform = FiniteShiftMeasure.uniform(cylinders[: min(4, len(cylinders))])
    entropy = kac_abramov_check(uniform, central_potential(params), params, rng=ctx.rng)

    ctx.csv("kac_abramov.csv", ["pair", "potential", "integral_tau", "lhs", "rhs", "abs_err"], rows)
    ctx.json(
        "kac_abramov.json", {"pairs": len(rows), "integral_ok": integral_ok, "entropy": entropy}
    )
    ctx.plot(
        "kac_abramov.svg",
        [r[4] for r in rows],
        {"lifted x integral_tau": [r[3] for r in rows]},
        kind="scatter",
        title="Lifted against induced integrals",
        xlabel="induced integral",
    )
    ctx.result.summary = {"max_abs_err": max(r[5] for r in rows)}
    ctx.verdict("integral_identity", _decided(integral_ok))
    ctx.verdict("entropy_identity", _settled(entropy.entropy_rel_err < _ENTROPY_REL_TOL))


# ── Runner ──


def run(config: RunConfig) -> int:
    """Execute the configured experiment and write its manifest.

    Returns:
        0 on success, 2 if some certificate stayed inconclusive, 1 on a
        numerical or I/O error, 3 on a configuration error.
    """
    experiment = EXPERIMENTS[config.experiment]
    ctx = RunContext(config, experiment.kind.value)
    logger.info("Running %s into %s (seed %d)", experiment.kind.value, ctx.out_dir, config.seed)
    error = None
    try:
        experiment.runner(ctx)
        code = ctx.result.exit_code
    except ConfigError as exc:
        logger.error("Configuration error: %s", exc)
        code, error = EXIT_CONFIG, str(exc)
    except HorseshoeError as exc:
        logger.error("%s failed: %s", experiment.kind.value, exc)
        code, error = EXIT_ERROR, f"{type(exc).__name__}: {exc}"

    result = ctx.result
    manifest = {
        "experiment": experiment.kind.value,
        "config": config,
        "artifacts": sorted(p.name for p in result.artifacts),
        "verdicts": result.verdicts,
        "summary": to_jsonable(result.summary),
        "exit_status": code,
        "error": error,
    }
    try:
        write_json(ctx.out_dir / MANIFEST, manifest)
    except HorseshoeError as exc:
        logger.error("Cannot write the manifest: %s", exc)
        return EXIT_ERROR
    logger.info("Wrote %d artifacts and %s (exit %d)", len(result.artifacts), MANIFEST, code)
    return code
