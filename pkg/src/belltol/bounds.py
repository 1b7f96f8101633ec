"""Closed-form noise-tolerance and maximal-violation bound families for
generic N-qudit states, GHZ states, Dicke states and the W state, plus their
large-N asymptotics.

Everything here follows from one identity: the worst-case (over all local
noises) critical visibility of a nonlocal state equals 2 / (1 + Y), where Y
is the state's maximal Bell violation for the regime in question. Upper
bounds on Y therefore give lower bounds on the tolerance, and lower bounds on
Y give upper bounds. Binomials are evaluated in exact integer arithmetic and
converted to floating point last.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from fractions import Fraction

from .errors import DomainError

PROJECTIVE = "projective"
GENERALIZED = "generalized"
MEAS_TYPES = (PROJECTIVE, GENERALIZED)

#: sentinel for the all-settings ("overall") regime
S_INF = math.inf

SQRT2 = math.sqrt(2.0)

GHZ_33_DISCREPANCY_NOTE = (
    "known discrepancy: the commonly quoted tolerable-noise bound 2/3 for the "
    "three-qutrit case (d=3, N=3, two settings, projective) exceeds the literal "
    "minimum 1/2 of this bound family, attained by the d^((n-1)/2) term; the "
    "computed value 1/2 is reported"
)

DICKE_LOWER_NOTE = (
    "the Dicke violation lower endpoint comes from an externally derived Bell "
    "inequality and carries no in-package numerical witness"
)


def _check_dn(d: int, n: int) -> None:
    if d < 2:
        raise DomainError(f"qudit dimension must be >= 2, got {d}")
    if n < 2:
        raise DomainError(f"party count must be >= 2, got {n}")


def _check_settings(s) -> float:
    if s == S_INF or s is None:
        return S_INF
    if isinstance(s, float) and not s.is_integer():
        raise DomainError(f"settings count must be an integer or inf, got {s}")
    s = int(s)
    if s < 2:
        raise DomainError(f"settings count must be >= 2, got {s}")
    return s


def _check_meas(mt: str) -> str:
    if mt not in MEAS_TYPES:
        raise DomainError(f"measurement type must be one of {MEAS_TYPES}, got {mt!r}")
    return mt


def tolerance_from_violation(upsilon: float) -> float:
    """Worst-case critical visibility 2 / (1 + Y); strictly decreasing in Y."""
    if upsilon < 1.0:
        raise DomainError(f"maximal violation must be >= 1, got {upsilon}")
    return 2.0 / (1.0 + upsilon)


def max_tolerable_noise(t: float) -> float:
    """Largest any-local-noise fraction preserving nonlocality: 1 - tolerance."""
    if not 0.0 < t <= 1.0:
        raise DomainError(f"tolerance must lie in (0, 1], got {t}")
    return 1.0 - t


@dataclass(frozen=True)
class BoundInterval:
    lower: float
    upper: float
    active_term: str = ""

    def __post_init__(self) -> None:
        if not 0.0 <= self.lower <= self.upper:
            raise DomainError(
                f"invalid interval [{self.lower}, {self.upper}]"
            )


@dataclass(frozen=True)
class ToleranceReport:
    """Bracketing intervals for the maximal violation Y, the noise tolerance T
    and the maximal tolerable noise M of one (family, d, n, s, meas) tuple.

    Endpoints are tied together: T = 2/(1+Y) endpoint-for-endpoint (upper Y
    gives lower T) and M = 1 - T endpoint-wise.
    """

    family: str
    d: int
    n: int
    s: float
    meas_type: str
    upsilon: BoundInterval
    tolerance: BoundInterval
    max_noise: BoundInterval
    k: int | None = None
    asymptotic_note: float | None = None
    notes: tuple[str, ...] = field(default=())

    def __post_init__(self) -> None:
        pairs = (
            (self.tolerance.lower, tolerance_from_violation(self.upsilon.upper)),
            (self.tolerance.upper, tolerance_from_violation(self.upsilon.lower)),
            (self.max_noise.lower, 1.0 - self.tolerance.upper),
            (self.max_noise.upper, 1.0 - self.tolerance.lower),
        )
        for got, want in pairs:
            if abs(got - want) > 1e-12:
                raise DomainError(
                    f"inconsistent report: {got!r} vs {want!r} violates the "
                    "tolerance/noise identities"
                )

    @property
    def regime(self) -> str:
        return "overall" if self.s == S_INF else "per-settings"

    def row(self) -> dict:
        """Flat mapping for CSV/JSON sweep tables."""
        return {
            "family": self.family,
            "d": self.d,
            "n": self.n,
            "s": "inf" if self.s == S_INF else int(self.s),
            "k": "" if self.k is None else self.k,
            "meas_type": self.meas_type,
            "upsilon_lo": self.upsilon.lower,
            "upsilon_hi": self.upsilon.upper,
            "tol_lo": self.tolerance.lower,
            "tol_hi": self.tolerance.upper,
            "noise_lo": self.max_noise.lower,
            "noise_hi": self.max_noise.upper,
            "active_term": self.upsilon.active_term,
            "regime": self.regime,
            "notes": "; ".join(self.notes),
        }


def report_from_upsilon(
    family: str,
    d: int,
    n: int,
    s: float,
    meas_type: str,
    upsilon_lo: float,
    upsilon_hi: float,
    active_term: str,
    k: int | None = None,
    asymptotic_note: float | None = None,
    notes: tuple[str, ...] = (),
) -> ToleranceReport:
    """Assemble a consistent report from a violation interval."""
    ups = BoundInterval(upsilon_lo, upsilon_hi, active_term=active_term)
    tol = BoundInterval(
        tolerance_from_violation(upsilon_hi),
        tolerance_from_violation(upsilon_lo),
        active_term=active_term,
    )
    noise = BoundInterval(
        1.0 - tol.upper, 1.0 - tol.lower, active_term=active_term
    )
    return ToleranceReport(
        family=family, d=d, n=n, s=s, meas_type=meas_type,
        upsilon=ups, tolerance=tol, max_noise=noise, k=k,
        asymptotic_note=asymptotic_note, notes=notes,
    )


def _min_term(terms: dict[str, float]) -> tuple[float, str]:
    label = min(terms, key=lambda k: (terms[k], k))
    return terms[label], label


def _fpow(base: float, exp: float) -> float:
    """Float power saturating to +inf instead of raising OverflowError."""
    try:
        return float(base) ** exp
    except OverflowError:
        return math.inf


def _fint(x: int) -> float:
    try:
        return float(x)
    except OverflowError:
        return math.inf


# --- generic N-qudit states ---------------------------------------------------


def generic_upsilon_upper(d: int, n: int, s, mt: str) -> tuple[float, str]:
    """Upper bound on the maximal violation of an arbitrary N-qudit state under
    S-setting scenarios (S = inf selects the all-settings regime)."""
    _check_dn(d, n)
    mt = _check_meas(mt)
    s = _check_settings(s)
    if s == S_INF:
        return _fint((2 * d - 1) ** (n - 1)), "(2d-1)^(n-1)"
    if mt == GENERALIZED:
        return _fint((2 * min(d, int(s)) - 1) ** (n - 1)), "(2*min(d,s)-1)^(n-1)"
    if s == 2:
        terms = {
            "d^((n-1)/2)": _fpow(d, (n - 1) / 2.0),
            "3^(n-1)": _fpow(3.0, n - 1),
        }
    else:
        terms = {
            "d^(s(n-1)/2)": _fpow(d, s * (n - 1) / 2.0),
            "(2*min(d,s)-1)^(n-1)": _fint((2 * min(d, int(s)) - 1) ** (n - 1)),
        }
    return _min_term(terms)


def generic_noise_bounds(d: int, n: int, s, mt: str) -> ToleranceReport:
    """Tolerance and tolerable-noise bounds for an arbitrary nonlocal N-qudit
    state. Only an upper violation bound exists in this generality, so the
    violation interval starts at the trivial 1."""
    hi, term = generic_upsilon_upper(d, n, s, mt)
    return report_from_upsilon(
        family="generic", d=d, n=n, s=_check_settings(s), meas_type=_check_meas(mt),
        upsilon_lo=1.0, upsilon_hi=hi, active_term=term,
    )


# --- GHZ states ---------------------------------------------------------------


def ghz_upsilon_upper(d: int, n: int, s, mt: str) -> tuple[float, str]:
    """Upper bound on the maximal violation of the N-qudit GHZ state; tighter
    than the generic family thanks to the extra 1 + 2^(n-1)(d-1) term."""
    _check_dn(d, n)
    mt = _check_meas(mt)
    s = _check_settings(s)
    ghz_term = 1.0 + _fpow(2.0, n - 1) * (d - 1)
    if s == S_INF:
        return ghz_term, "1+2^(n-1)(d-1)"
    if mt == GENERALIZED:
        terms = {
            "(2s-1)^(n-1)": _fint((2 * int(s) - 1) ** (n - 1)),
            "1+2^(n-1)(d-1)": ghz_term,
        }
    elif s == 2:
        terms = {
            "d^((n-1)/2)": _fpow(d, (n - 1) / 2.0),
            "3^(n-1)": _fpow(3.0, n - 1),
            "1+2^(n-1)(d-1)": ghz_term,
        }
    else:
        terms = {
            "d^(s(n-1)/2)": _fpow(d, s * (n - 1) / 2.0),
            "(2s-1)^(n-1)": _fint((2 * int(s) - 1) ** (n - 1)),
            "1+2^(n-1)(d-1)": ghz_term,
        }
    return _min_term(terms)


def ghz_noise_bounds(d: int, n: int, s, mt: str) -> ToleranceReport:
    """GHZ-specific tolerance/noise bounds. For qubits (d = 2) the interval is
    tightened by the exact two-setting projective violation, which lower-bounds
    the maximal violation in every regime with s >= 2."""
    hi, term = ghz_upsilon_upper(d, n, s, mt)
    lo = 1.0
    notes: tuple[str, ...] = ()
    if d == 2:
        lo = min(_fpow(2.0, (n - 1) / 2.0), hi)
        notes = ("violation lower endpoint: exact two-setting projective value "
                 "2^((n-1)/2) of the n-qubit maximally correlated state",)
    if (d, n, s, mt) == (3, 3, 2, PROJECTIVE):
        notes = notes + (GHZ_33_DISCREPANCY_NOTE,)
    return report_from_upsilon(
        family="ghz", d=d, n=n, s=_check_settings(s), meas_type=_check_meas(mt),
        upsilon_lo=lo, upsilon_hi=hi, active_term=term, notes=notes,
    )


def ghz_qubit_exact(n: int) -> ToleranceReport:
    """All-regime summary for the n-qubit GHZ state.

    Under two-setting projective scenarios the maximal violation is exactly
    2^((n-1)/2), so the overall violation lies in [2^((n-1)/2), 1 + 2^(n-1)],
    the overall tolerance in [1/(1+2^(n-2)), 2/(1+2^((n-1)/2))] and the
    maximal tolerable noise in the complementary interval. The tolerance
    upper endpoint equals the exact two-setting projective tolerance.
    """
    if n < 2:
        raise DomainError(f"n must be >= 2, got {n}")
    lo = _fpow(2.0, (n - 1) / 2.0)
    hi = 1.0 + _fpow(2.0, n - 1)
    return report_from_upsilon(
        family="ghz", d=2, n=n, s=S_INF, meas_type=GENERALIZED,
        upsilon_lo=lo, upsilon_hi=hi, active_term="1+2^(n-1)(d-1)",
        asymptotic_note=ghz_qubit_asymptotic(n),
        notes=("violation lower endpoint: exact two-setting projective value "
               "2^((n-1)/2) of the n-qubit maximally correlated state",),
    )


def ghz_qubit_asymptotic(n: int) -> float:
    """Large-n approximation 2^(-(n-3)/2) of the n-qubit GHZ tolerance
    threshold 2/(1+2^((n-1)/2))."""
    if n < 2:
        raise DomainError(f"n must be >= 2, got {n}")
    return 2.0 ** (-(n - 3) / 2.0)


# --- Dicke and W states -------------------------------------------------------


def _dicke_upsilon_lower(n: int, k: int) -> float:
    # exact rational 2^(n-1)/C(n,k) before the sqrt(2)-1 factor
    ratio = float(Fraction(2 ** (n - 1), math.comb(n, k)))
    return 1.0 + ratio * (SQRT2 - 1.0)


def dicke_bounds(n: int, k: int) -> ToleranceReport:
    """Overall-regime tolerance bounds for the n-qubit Dicke state with k
    excitations. The tolerance upper endpoint is also the nonlocality
    threshold: above it, the mixture with any local noise stays nonlocal."""
    if n < 2:
        raise DomainError(f"n must be >= 2, got {n}")
    if not 1 <= k <= n - 1:
        raise DomainError(f"k must be in 1..{n - 1}, got {k}")
    lo = _dicke_upsilon_lower(n, k)
    hi = _fpow(3.0, n - 1)
    return report_from_upsilon(
        family="dicke" if k != 1 else "w", d=2, n=n, s=S_INF, meas_type=GENERALIZED,
        upsilon_lo=lo, upsilon_hi=hi, active_term="3^(n-1)", k=k,
        notes=(DICKE_LOWER_NOTE,),
    )


def w_bounds(n: int) -> ToleranceReport:
    """N-qubit W state bounds: the k = 1 Dicke case, whose tolerance upper
    endpoint simplifies to n / (n + 2^(n-2)(sqrt(2)-1))."""
    return dicke_bounds(n, 1)


@dataclass(frozen=True)
class DickeHalfAsymptotic:
    """Exact vs approximate nonlocality threshold for the half-excited Dicke
    state, plus the binomial against its Stirling form (the approximation's
    only ingredient)."""

    n: int
    exact_threshold: float
    approx_threshold: float
    binomial: int
    binomial_stirling: float

    @property
    def binomial_ratio(self) -> float:
        return self.binomial / self.binomial_stirling


def dicke_half_asymptotic(n: int) -> DickeHalfAsymptotic:
    """Large-even-n threshold (4*sqrt(2)/(sqrt(2)-1)) / sqrt(pi n) for the
    n-qubit Dicke state with n/2 excitations, next to the exact value. The
    approximation can exceed 1 at moderate n; it is reported as-is."""
    if n < 2 or n % 2 != 0:
        raise DomainError(f"n must be even and >= 2, got {n}")
    k = n // 2
    exact = 1.0 / (1.0 + float(Fraction(2 ** (n - 2), math.comb(n, k))) * (SQRT2 - 1.0))
    approx = (4.0 * SQRT2 / (SQRT2 - 1.0)) / math.sqrt(math.pi * n)
    stirling = 2.0 ** n * SQRT2 / math.sqrt(math.pi * n)
    return DickeHalfAsymptotic(
        n=n,
        exact_threshold=exact,
        approx_threshold=approx,
        binomial=math.comb(n, k),
        binomial_stirling=stirling,
    )


# --- sweeps -------------------------------------------------------------------


def family_report(family: str, d: int, n: int, s, mt: str, k: int | None = None) -> ToleranceReport:
    """Dispatch one (family, parameters) tuple to its bound family."""
    if family == "generic":
        return generic_noise_bounds(d, n, s, mt)
    if family == "ghz":
        return ghz_noise_bounds(d, n, s, mt)
    if family == "w":
        if d != 2:
            raise DomainError("the W family is defined for qubits (d = 2)")
        return w_bounds(n)
    if family == "dicke":
        if d != 2:
            raise DomainError("the Dicke family is defined for qubits (d = 2)")
        if k is None:
            raise DomainError("the Dicke family needs an excitation count k")
        return dicke_bounds(n, k)
    raise DomainError(f"unknown state family {family!r}")


def sweep_reports(
    family: str,
    d_values: list[int],
    n_values: list[int],
    s_values: list,
    meas_types: list[str],
    k: int | None = None,
) -> list[ToleranceReport]:
    reports = []
    for d in d_values:
        for n in n_values:
            if family == "w":
                reports.append(family_report(family, d, n, S_INF, GENERALIZED))
                continue
            if family == "dicke":
                k_values = [k] if k is not None else list(range(1, n))
                for kk in k_values:
                    reports.append(family_report(family, d, n, S_INF, GENERALIZED, k=kk))
                continue
            for s in s_values:
                for mt in meas_types:
                    if s == S_INF and mt == PROJECTIVE:
                        continue  # the all-settings regime covers both types
                    reports.append(family_report(family, d, n, s, mt, k=k))
    return reports
