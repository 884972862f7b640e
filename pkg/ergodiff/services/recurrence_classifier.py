"""Integral recurrence/transience criteria from radial envelopes.

For C(x) = 2 x.b(x) the envelopes beta_upper/beta_lower(r) are the sup/inf of
d - 1 + C over |x| = r, and I(r) = int_{r0}^r beta(u)/u du. The criteria are

    cr1  int exp(-I_upper) = inf      -> recurrent
    cr2  int exp(-I_lower) < inf      -> transient
    cr4  int exp(+I_upper) < inf      -> finite invariant measure
    cr5  Q(N) -> inf                  -> no finite invariant measure

Divergence and convergence are judged from partial integrals along the
schedule r0 2^k; no finite computation proves either, so verdicts are
labeled with the heuristic that produced them.
"""
import logging
import math
from functools import lru_cache, partial

import numpy as np
import sympy as sp
from scipy.integrate import quad
from scipy.optimize import minimize_scalar

from ergodiff.config import ClassifierSettings, settings
from ergodiff.core.errors import QuadratureError
from ergodiff.models.polynomial import PolyDriftField
from ergodiff.models.profile import RadialProfile, Which
from ergodiff.models.radial import PotentialKind, RadialGradientField
from ergodiff.schemas.report import (
    ClassificationReport,
    Criterion,
    CriterionVerdict,
    OuterSign,
    Summary,
    Verdict,
)
from ergodiff.services.logquad import LogCumulative, log_increments

logger = logging.getLogger(__name__)

_INCREMENT_TOL = 1e-6
_CR5_RATIO = 1.5
_PROFILE_KINDS = ("brownian", "power-well", "attractive", "z4", "holomorphic")


# C function and envelopes

def c_function(field, x) -> np.ndarray:
    """C(x) = 2 sum_i x_i b_i(x)"""
    x = np.asarray(x, dtype=np.float64)
    return 2.0 * np.sum(x * field.evaluate(x), axis=-1)


def _circle_extrema(field, r: float, n_angles: int, angle_tol: float) -> tuple[float, float]:
    phi = np.linspace(-math.pi, math.pi, n_angles, endpoint=False)
    step = 2.0 * math.pi / n_angles

    def c_at(angle):
        return float(c_function(field, [r * math.cos(angle), r * math.sin(angle)]))

    values = c_function(field, r * np.stack([np.cos(phi), np.sin(phi)], axis=-1))
    if np.ptp(values) == 0.0:
        return float(values[0]), float(values[0])

    extrema = []
    for sign, i in ((-1.0, int(np.argmax(values))), (1.0, int(np.argmin(values)))):
        best = float(values[i])
        bracket = (phi[i] - step, phi[i], phi[i] + step)
        try:
            res = minimize_scalar(
                lambda a: sign * c_at(a),
                bracket=bracket,
                method="golden",
                options={"xtol": angle_tol},
            )
            best = max(best, -res.fun) if sign < 0 else min(best, res.fun)
        except ValueError:
            # flat top: the grid value already is the extremum
            pass
        extrema.append(best)
    return extrema[0], extrema[1]


def envelopes(
    field,
    r: float,
    n_angles: int | None = None,
    angle_tol: float | None = None,
) -> tuple[float, float]:
    """(beta_upper(r), beta_lower(r)); analytic for profiles and radial gradient fields"""
    if r <= 0:
        raise ValueError(f"radius must be positive, got {r}")
    if isinstance(field, RadialProfile):
        return float(field.beta("upper", r)), float(field.beta("lower", r))
    if isinstance(field, RadialGradientField):
        value = field.dim - 1 + float(field.c_radial(r))
        return value, value

    n_angles = n_angles or settings.classifier.n_angles
    angle_tol = angle_tol or settings.classifier.angle_tol
    if n_angles < 8:
        raise ValueError(f"n_angles must be at least 8, got {n_angles}")
    if field.dim == 1:
        values = c_function(field, np.array([[r], [-r]]))
        return float(values.max()), float(values.min())
    if field.dim != 2:
        raise ValueError(f"sampled envelopes need dim 1 or 2, got {field.dim}")
    c_max, c_min = _circle_extrema(field, r, n_angles, angle_tol)
    return 1.0 + c_max, 1.0 + c_min


# Profiles

def _constant(value: float, r) -> np.ndarray:
    return np.full(np.shape(r), value, dtype=np.float64)


def brownian_profile(d: int) -> RadialProfile:
    """b = 0: beta = d - 1, I = (d - 1) ln(r/r0)"""
    if d < 1:
        raise ValueError(f"dimension must be positive, got {d}")
    return RadialProfile(
        name=f"brownian-{d}d",
        dim=d,
        beta_upper=partial(_constant, d - 1.0),
        beta_lower=partial(_constant, d - 1.0),
        source="closed_form(brownian)",
        i_upper=lambda r0, r: (d - 1.0) * np.log(r / r0),
        i_lower=lambda r0, r: (d - 1.0) * np.log(r / r0),
    )


def _gradient_profile(field: RadialGradientField, label: str) -> RadialProfile:
    d, alpha = field.dim, field.alpha

    def beta(r):
        return d - 1.0 + field.c_radial(r)

    if field.kind is PotentialKind.ATTRACTIVE:
        def integral(r0, r):
            return (d - 1.0) * np.log(r / r0) - 2.0 * (r ** alpha - r0 ** alpha)
    else:
        def integral(r0, r):
            return (d - 1.0) * np.log(r / r0) + 2.0 * (r ** -alpha - r0 ** -alpha)

    return RadialProfile(
        name=f"{label}-{d}d-alpha{alpha:g}",
        dim=d,
        beta_upper=beta,
        beta_lower=beta,
        source=f"closed_form({label})",
        i_upper=integral,
        i_lower=integral,
    )


def power_well_profile(d: int, alpha: float) -> RadialProfile:
    """V = -r^(-alpha): beta = d - 1 - 2 alpha r^(-alpha)"""
    field = RadialGradientField(dim=d, alpha=alpha, kind=PotentialKind.REPULSIVE_WELL)
    return _gradient_profile(field, "power-well")


def attractive_profile(d: int, alpha: float) -> RadialProfile:
    """V = r^alpha: beta = d - 1 - 2 alpha r^alpha"""
    field = RadialGradientField(dim=d, alpha=alpha, kind=PotentialKind.ATTRACTIVE)
    return _gradient_profile(field, "attractive")


def holomorphic_profile(n: int) -> RadialProfile:
    """b = -(d/dz) z^n: C = -2n r^n cos((n - 2) phi)"""
    if n < 2:
        raise ValueError(f"power must be at least 2, got {n}")
    if n == 2:
        return RadialProfile(
            name="holo2",
            dim=2,
            beta_upper=lambda r: 1.0 - 4.0 * np.asarray(r) ** 2,
            beta_lower=lambda r: 1.0 - 4.0 * np.asarray(r) ** 2,
            source="closed_form(holo2)",
            i_upper=lambda r0, r: np.log(r / r0) - 2.0 * (r ** 2 - r0 ** 2),
            i_lower=lambda r0, r: np.log(r / r0) - 2.0 * (r ** 2 - r0 ** 2),
        )
    return RadialProfile(
        name=f"holo{n}",
        dim=2,
        beta_upper=lambda r: 1.0 + 2.0 * n * np.asarray(r) ** n,
        beta_lower=lambda r: 1.0 - 2.0 * n * np.asarray(r) ** n,
        source=f"closed_form(holo{n})",
        i_upper=lambda r0, r: np.log(r / r0) + 2.0 * (r ** n - r0 ** n),
        i_lower=lambda r0, r: np.log(r / r0) - 2.0 * (r ** n - r0 ** n),
    )


def z4_profile() -> RadialProfile:
    """beta = 1 +- 8 r^4, I = ln(r/r0) +- 2(r^4 - r0^4)"""
    return holomorphic_profile(4).model_copy(update={"name": "z4"})


@lru_cache(maxsize=8192)
def _cached_envelopes(field, r: float, n_angles: int, angle_tol: float) -> tuple[float, float]:
    return envelopes(field, r, n_angles, angle_tol)


def _sampled_beta(field, which: Which, n_angles: int, angle_tol: float, r) -> np.ndarray:
    r = np.asarray(r, dtype=np.float64)
    k = 0 if which == "upper" else 1
    out = np.array(
        [_cached_envelopes(field, float(v), n_angles, angle_tol)[k] for v in r.ravel()]
    )
    return out.reshape(r.shape)


def sampled_profile(
    field: PolyDriftField, n_angles: int | None = None, angle_tol: float | None = None
) -> RadialProfile:
    """Envelopes from grid search plus golden-section refinement on circles"""
    n_angles = n_angles or settings.classifier.n_angles
    angle_tol = angle_tol or settings.classifier.angle_tol
    if field.dim not in (1, 2):
        raise ValueError(f"sampled envelopes need dim 1 or 2, got {field.dim}")
    return RadialProfile(
        name=field.name,
        dim=field.dim,
        beta_upper=partial(_sampled_beta, field, "upper", n_angles, angle_tol),
        beta_lower=partial(_sampled_beta, field, "lower", n_angles, angle_tol),
        source=f"sampled({field.name}, {n_angles})",
    )


def profile_for(field) -> RadialProfile:
    """Closed form for radial gradient fields, sampled envelopes otherwise"""
    if isinstance(field, RadialGradientField):
        return _gradient_profile(
            field, "attractive" if field.kind is PotentialKind.ATTRACTIVE else "power-well"
        )
    return sampled_profile(field)


def make_profile(
    kind: str, dim: int = 2, alpha: float = 1.0, n: int = 4
) -> RadialProfile:
    """Named built-in profile, as selected by `classify --profile`"""
    if kind == "brownian":
        return brownian_profile(dim)
    if kind == "power-well":
        return power_well_profile(dim, alpha)
    if kind == "attractive":
        return attractive_profile(dim, alpha)
    if kind == "z4":
        return z4_profile()
    if kind == "holomorphic":
        return holomorphic_profile(n)
    raise ValueError(f"unknown profile '{kind}', expected one of {', '.join(_PROFILE_KINDS)}")


# Integrals

def i_integral(profile: RadialProfile, which: Which, r0: float, r: float) -> float:
    """I(r) = int_{r0}^r beta(u)/u du, closed form when the profile has one"""
    if r0 <= 0 or r < r0:
        raise ValueError(f"need 0 < r0 <= r, got r0={r0}, r={r}")
    if r == r0:
        return 0.0
    closed = profile.i_upper if which == "upper" else profile.i_lower
    if closed is not None:
        return float(closed(r0, np.float64(r)))

    # beta(u)/u du = beta(e^v) dv
    def integrand(v):
        return float(profile.beta(which, math.exp(v)))

    lo, hi = math.log(r0), math.log(r)
    scale = max(abs(integrand(lo)), abs(integrand(hi)), 1.0)
    out = quad(integrand, lo, hi, epsabs=1e-10 * scale, epsrel=1e-10, limit=200, full_output=1)
    if len(out) > 3:
        raise QuadratureError(f"I({which}) on [{r0}, {r}] did not converge: {out[3]}")
    return float(out[0])


def _outer_exponent(profile: RadialProfile, sign: OuterSign, r0: float, r_max: float):
    which: Which = "lower" if sign is OuterSign.EXP_MINUS_LOWER else "upper"
    factor = 1.0 if sign is OuterSign.EXP_PLUS_UPPER else -1.0
    i_fn = profile.integral_function(which, r0, r_max)
    return lambda u: factor * i_fn(u)


def outer_log_increments(
    profile: RadialProfile, sign: OuterSign | str, r0: float, schedule: list[float]
) -> np.ndarray:
    """log of int exp(+-I) over [r0, N_1], [N_1, N_2], ..."""
    sign = OuterSign(sign)
    g = _outer_exponent(profile, sign, r0, schedule[-1])
    return log_increments(g, r0, schedule)


def outer_integral_logdomain(
    profile: RadialProfile, sign: OuterSign | str, r0: float, N: float
) -> float:
    """log of int_{r0}^N exp(+-I(u)) du, accumulated in the log domain"""
    if N <= r0:
        raise ValueError(f"upper limit {N} must exceed r0={r0}")
    schedule = _doubling_schedule(r0, N)
    return float(np.logaddexp.reduce(outer_log_increments(profile, sign, r0, schedule)))


def _doubling_schedule(r0: float, N: float) -> list[float]:
    """r0 2^k below N, then N itself"""
    points = []
    k = 1
    while r0 * 2 ** k < N:
        points.append(r0 * 2 ** k)
        k += 1
    return points + [N]


def cr5_quotient(profile: RadialProfile, r0: float, N: float) -> tuple[float, float]:
    """(log numerator, log denominator) of the cr5 quotient at N"""
    num, den = _cr5_logs(profile, r0, [N])
    return float(num[-1]), float(den[-1])


def _cr5_logs(
    profile: RadialProfile, r0: float, schedule: list[float]
) -> tuple[np.ndarray, np.ndarray]:
    if schedule[0] <= r0:
        raise ValueError(f"upper limit {schedule[0]} must exceed r0={r0}")
    top = schedule[-1]
    i_up = profile.integral_function("upper", r0, top)
    i_low = profile.integral_function("lower", r0, top)
    inner = LogCumulative(i_up, r0, top)

    def numerator(s):
        return -i_up(s) + inner(s)

    # -I(s) and log int e^{I} both grow like I(s) and cancel to a small remainder
    num = np.logaddexp.accumulate(log_increments(numerator, r0, schedule, magnitude=i_up))
    den = np.logaddexp.accumulate(log_increments(lambda u: -i_low(u), r0, schedule))
    return num, den


# Verdicts

def _log_increment_diffs(increments: np.ndarray) -> np.ndarray:
    return np.diff(increments[-3:])


def _converges(partials: np.ndarray, increments: np.ndarray, cfg: ClassifierSettings) -> str | None:
    if increments[-1] - partials[-1] < math.log(cfg.tail_ratio):
        return f"tail over the last doubling below {cfg.tail_ratio:g} of the total"
    diffs = _log_increment_diffs(increments)
    if np.all(diffs <= math.log(cfg.geometric_ratio)):
        return f"last increments shrink with ratio <= {cfg.geometric_ratio:g}"
    return None


def _diverges(partials: np.ndarray, increments: np.ndarray, cfg: ClassifierSettings) -> str | None:
    if partials[-1] > cfg.blowup_log:
        return f"log partial integral exceeds {cfg.blowup_log:g}"
    diffs = _log_increment_diffs(increments)
    if np.all(diffs >= -_INCREMENT_TOL):
        return "last three doubling increments non-decreasing"
    return None


_OUTER = {
    Criterion.CR1: (OuterSign.EXP_MINUS_UPPER, Verdict.HOLDS),
    Criterion.CR2: (OuterSign.EXP_MINUS_LOWER, Verdict.FAILS),
    Criterion.CR4: (OuterSign.EXP_PLUS_UPPER, Verdict.FAILS),
}


def default_schedule(r0: float, doublings: int | None = None) -> list[float]:
    doublings = doublings or settings.classifier.doublings
    return [r0 * 2.0 ** k for k in range(1, doublings + 1)]


def criterion_verdict(
    profile: RadialProfile,
    criterion: Criterion | str,
    r0: float = 1.0,
    schedule: list[float] | None = None,
    cfg: ClassifierSettings | None = None,
) -> CriterionVerdict:
    """Evaluate one criterion along the N schedule (default r0 2^k, k = 1..doublings)"""
    criterion = Criterion(criterion)
    cfg = cfg or settings.classifier
    schedule = schedule or default_schedule(r0, cfg.doublings)
    if len(schedule) < 3:
        raise ValueError("the schedule needs at least three upper limits")

    if criterion is Criterion.CR5:
        return _cr5_verdict(profile, r0, schedule, cfg)

    sign, on_divergence = _OUTER[criterion]
    increments = outer_log_increments(profile, sign, r0, schedule)
    partials = np.logaddexp.accumulate(increments)
    on_convergence = Verdict.FAILS if on_divergence is Verdict.HOLDS else Verdict.HOLDS

    reason = _converges(partials, increments, cfg)
    verdict = on_convergence
    if reason is None:
        reason = _diverges(partials, increments, cfg)
        verdict = on_divergence
    if reason is None:
        verdict, reason = Verdict.INCONCLUSIVE, "no settled trend over the schedule"
    logger.debug("%s %s for %s: %s", criterion.value, verdict.value, profile.name, reason)
    return CriterionVerdict(
        name=criterion,
        verdict=verdict,
        evidence=[(float(n), float(v)) for n, v in zip(schedule, partials)],
        r0=r0,
        heuristic=reason,
    )


def _cr5_verdict(
    profile: RadialProfile, r0: float, schedule: list[float], cfg: ClassifierSettings
) -> CriterionVerdict:
    num, den = _cr5_logs(profile, r0, schedule)
    log_q = num - den
    steps = np.diff(log_q[-3:])
    if log_q[-1] > cfg.blowup_log or np.all(steps > math.log(_CR5_RATIO)):
        verdict, reason = Verdict.HOLDS, "quotient grows without bound"
    elif log_q[-1] < -cfg.blowup_log or np.all(steps < -math.log(_CR5_RATIO)):
        verdict, reason = Verdict.FAILS, "quotient tends to 0"
    else:
        verdict, reason = Verdict.INCONCLUSIVE, "quotient neither grows nor vanishes"
    return CriterionVerdict(
        name=Criterion.CR5,
        verdict=verdict,
        evidence=[(float(n), float(q)) for n, q in zip(schedule, log_q)],
        r0=r0,
        heuristic=reason,
    )


def _summarize(verdicts: dict[Criterion, Verdict], cfg: ClassifierSettings) -> Summary:
    holds = {c for c, v in verdicts.items() if v is Verdict.HOLDS}
    if Criterion.CR1 in holds and Criterion.CR4 in holds:
        return Summary.POSITIVE_RECURRENT
    if Criterion.CR1 in holds:
        if Criterion.CR5 in holds and cfg.report_null_recurrence:
            return Summary.RECURRENT_NO_FINITE_MEASURE
        return Summary.RECURRENT
    if Criterion.CR2 in holds:
        return Summary.TRANSIENT
    return Summary.INCONCLUSIVE


def classify(
    profile: RadialProfile,
    r0: float | None = None,
    schedule: list[float] | None = None,
    cfg: ClassifierSettings | None = None,
) -> ClassificationReport:
    """Run cr1, cr2, cr4 and cr5 and compose the summary"""
    cfg = cfg or settings.classifier
    r0 = cfg.r0 if r0 is None else r0
    if r0 <= 0:
        raise ValueError(f"r0 must be positive, got {r0}")
    schedule = schedule or default_schedule(r0, cfg.doublings)
    criteria = [criterion_verdict(profile, c, r0, schedule, cfg) for c in Criterion]
    summary = _summarize({c.name: c.verdict for c in criteria}, cfg)

    notes = [
        "Verdicts are numerical evidence from partial integrals at N = r0 2^k "
        f"up to N = {schedule[-1]:g}; a criterion failing at r0 = {r0:g} "
        "does not rule it out for another r0."
    ]
    if summary is Summary.INCONCLUSIVE:
        notes.append(
            "Neither the recurrence (cr1) nor the transience (cr2) criterion applies; "
            "the radial envelopes cannot decide the behavior of this diffusion."
        )
        logger.warning("Classification of %s is inconclusive", profile.name)
    logger.info("Classified %s: %s", profile.name, summary.value)
    return ClassificationReport(
        profile=profile.name, r0=r0, criteria=criteria, summary=summary, notes=" ".join(notes)
    )


def report_to_table(report: ClassificationReport) -> str:
    """Human-readable table of a classification report"""
    lines = [
        f"profile: {report.profile}    r0: {report.r0:g}",
        f"{'criterion':<10}{'verdict':<14}{'N_max':>10}{'log value':>16}  heuristic",
    ]
    for item in report.criteria:
        n_max, last = item.evidence[-1] if item.evidence else (math.nan, math.nan)
        lines.append(
            f"{item.name.value:<10}{item.verdict.value:<14}{n_max:>10g}{last:>16.6g}  "
            f"{item.heuristic}"
        )
    lines.append(f"summary: {report.summary.value}")
    if report.notes:
        lines.append(f"notes: {report.notes}")
    return "\n".join(lines)


# Stationary density of the repulsive-well family

def stationary_density_residual(d: int, alpha: float, points) -> np.ndarray:
    """div((1/2) grad rho - b rho) for rho = exp(-2V), V = -r^(-alpha), b = -grad V"""
    xs = sp.symbols(f"x1:{d + 1}")
    r = sp.sqrt(sum(x ** 2 for x in xs))
    potential = -r ** (-sp.nsimplify(alpha))
    rho = sp.exp(-2 * potential)
    drift = [-sp.diff(potential, x) for x in xs]
    flux = [sp.diff(rho, x) / 2 - b * rho for x, b in zip(xs, drift)]
    residual = sum(sp.diff(f, x) for f, x in zip(flux, xs))
    fn = sp.lambdify(xs, residual, modules="numpy")
    points = np.atleast_2d(np.asarray(points, dtype=np.float64))
    if points.shape[-1] != d:
        raise ValueError(f"expected points with {d} coordinates, got shape {points.shape}")
    values = fn(*points.T)
    return np.broadcast_to(np.asarray(values, dtype=np.float64), points.shape[:-1]).copy()
