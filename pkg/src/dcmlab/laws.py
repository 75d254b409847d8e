"""Degree laws.

``DiscreteLaw`` is a dense pmf on 0..C-1 together with bookkeeping for the
mass that truncation dropped.  Truncated laws are never renormalized: the
dropped probability (``tail_mass``) and the matching CDF-tail remainder
(``tail_cdf_gap``, which bounds the Wasserstein error the truncation can
introduce) are tracked instead, so distance computations can report an
honest error bound.

``JointDegreeLaw`` is the prescribed joint law of one node's (in, out)
degree pair, in one of four shapes: d-regular, independent marginals,
fully dependent (equal coordinates), or an explicit finite table.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from functools import cached_property

import numpy as np
from scipy import special

from .errors import DegenerateLaw, InvalidLaw

DEFAULT_TAIL_TOL = 1e-12
# Memory guard for heavy-tailed pmfs; Pareto-mixed laws use this instead of
# DEFAULT_TAIL_TOL because mass 1e-12 would need ~1e8 retained entries.
HEAVY_TAIL_TOL = 1e-10


@dataclass(frozen=True)
class DiscreteLaw:
    """A probability mass function on the nonnegative integers.

    pmf[k] is the retained probability of k; the retained support is
    0..tail_cutoff-1.  ``tail_mass`` is the probability beyond the cutoff
    and ``tail_cdf_gap`` is sum_{k >= cutoff} (1 - F(k)), both zero for
    laws that were not truncated.
    """

    pmf: np.ndarray
    tail_mass: float = 0.0
    tail_cdf_gap: float = 0.0

    def __post_init__(self):
        arr = np.asarray(self.pmf, dtype=np.float64)
        if arr.ndim != 1 or arr.size == 0:
            raise InvalidLaw("pmf must be a nonempty 1-d array")
        if np.any(arr < 0):
            raise InvalidLaw("pmf entries must be nonnegative")
        total = float(arr.sum()) + self.tail_mass
        if abs(total - 1.0) > 1e-12:
            raise InvalidLaw(f"pmf plus tail mass sums to {total}, not 1")
        arr = arr.copy()
        arr.flags.writeable = False
        object.__setattr__(self, "pmf", arr)

    @property
    def tail_cutoff(self) -> int:
        return self.pmf.size

    @property
    def support_max(self) -> int:
        return self.pmf.size - 1

    @cached_property
    def total(self) -> float:
        return float(self.pmf.sum())

    @cached_property
    def mean(self) -> float:
        return float(np.arange(self.pmf.size) @ self.pmf)

    @cached_property
    def cdf(self) -> np.ndarray:
        c = np.cumsum(self.pmf)
        c.flags.writeable = False
        return c

    @cached_property
    def _one_minus_cdf_suffix(self) -> np.ndarray:
        # suffix[i] = sum_{k >= i, k < cutoff} (1 - F(k)); used by the
        # short-vs-long fast path of wasserstein1.
        rem = 1.0 - self.cdf
        s = np.concatenate([np.cumsum(rem[::-1])[::-1], [0.0]])
        s.flags.writeable = False
        return s

    def moment(self, order: float) -> float:
        k = np.arange(self.pmf.size, dtype=np.float64)
        with np.errstate(divide="ignore"):
            pk = np.where(k > 0, k**order, 0.0 if order > 0 else 1.0)
        return float(pk @ self.pmf)

    def pgf(self, s: float) -> float:
        """E[s^X] over the retained support."""
        if s < 0 or s > 1 + 1e-12:
            raise ValueError("pgf evaluated only on [0, 1]")
        n = self.pmf.size
        if s >= 1.0:
            return self.total
        if s == 0.0:
            return float(self.pmf[0])
        cut = min(n, int(745.0 / -math.log(s)) + 2)
        powers = np.power(s, np.arange(cut, dtype=np.float64))
        return float(self.pmf[:cut] @ powers)

    def sample(self, rng: np.random.Generator, size: int) -> np.ndarray:
        """Inverse-CDF draws; tail mass (if any) collapses onto the cutoff."""
        u = rng.random(size)
        out = np.searchsorted(self.cdf, u, side="left")
        return np.minimum(out, self.pmf.size - 1).astype(np.int64)

    @staticmethod
    def point_mass(value: int) -> "DiscreteLaw":
        if value < 0:
            raise InvalidLaw("point mass must sit on a nonnegative integer")
        p = np.zeros(value + 1)
        p[value] = 1.0
        return DiscreteLaw(p)

    @staticmethod
    def from_counts(counts: np.ndarray) -> "DiscreteLaw":
        counts = np.asarray(counts, dtype=np.float64)
        total = counts.sum()
        if total <= 0:
            raise InvalidLaw("empty counts")
        return DiscreteLaw(counts / total)


def _trim(pmf: np.ndarray) -> np.ndarray:
    nz = np.nonzero(pmf)[0]
    return pmf[: nz[-1] + 1] if nz.size else pmf[:1]


# ---------------------------------------------------------------------------
# Marginal laws: a truncated pmf plus an exact sampler.
# ---------------------------------------------------------------------------


class Marginal:
    """One coordinate of a joint degree law."""

    kind: str = "abstract"

    def law(self) -> DiscreteLaw:
        raise NotImplementedError

    def sample(self, rng: np.random.Generator, size: int) -> np.ndarray:
        return self.law().sample(rng, size)

    @property
    def mean(self) -> float:
        """Exact mean when known in closed form, else the retained mean."""
        return self.law().mean

    @property
    def moment_order_bound(self) -> float:
        """sup{r : E[X^r] < infinity}."""
        return math.inf

    def params(self) -> dict:
        raise NotImplementedError


class PointMassMarginal(Marginal):
    kind = "point"

    def __init__(self, value: int):
        self.value = int(value)
        self._law = DiscreteLaw.point_mass(self.value)

    def law(self):
        return self._law

    def sample(self, rng, size):
        return np.full(size, self.value, dtype=np.int64)

    @property
    def mean(self):
        return float(self.value)

    def params(self):
        return {"kind": self.kind, "value": self.value}


class TableMarginal(Marginal):
    kind = "table"

    def __init__(self, pmf):
        self._law = DiscreteLaw(np.asarray(pmf, dtype=np.float64))

    def law(self):
        return self._law

    def params(self):
        return {"kind": self.kind, "pmf": self._law.pmf.tolist()}


class GeometricMarginal(Marginal):
    """Geometric on {0, 1, ...}: P(X=k) = p (1-p)^k."""

    kind = "geometric"

    def __init__(self, success: float, tail_tol: float = DEFAULT_TAIL_TOL):
        if not 0 < success < 1:
            raise InvalidLaw("geometric success probability must be in (0,1)")
        self.success = float(success)
        q = 1.0 - success
        cutoff = int(math.ceil(math.log(tail_tol) / math.log(q))) + 1
        k = np.arange(cutoff)
        pmf = success * q**k
        tail = q**cutoff
        # sum_{k>=C}(1-F(k)) = E[(X-C)+] = q^C * q/p  (memoryless)
        gap = tail * q / success
        self._law = DiscreteLaw(pmf, tail_mass=float(tail), tail_cdf_gap=float(gap))

    def law(self):
        return self._law

    def sample(self, rng, size):
        return (rng.geometric(self.success, size) - 1).astype(np.int64)

    @property
    def mean(self):
        return (1.0 - self.success) / self.success

    def params(self):
        return {"kind": self.kind, "success": self.success}


class PoissonMarginal(Marginal):
    kind = "poisson"

    def __init__(self, lam: float, tail_tol: float = DEFAULT_TAIL_TOL):
        if lam < 0:
            raise InvalidLaw("poisson mean must be nonnegative")
        self.lam = float(lam)
        if lam == 0:
            self._law = DiscreteLaw(np.array([1.0]))
            return
        cutoff = int(lam + 12 * math.sqrt(lam + 1) + 30)
        while special.pdtrc(cutoff - 1, lam) > tail_tol:
            cutoff *= 2
        k = np.arange(cutoff)
        pmf = np.exp(k * math.log(lam) - lam - special.gammaln(k + 1))
        tail = float(special.pdtrc(cutoff - 1, lam))
        first_mom = float(k @ pmf)
        gap = max(0.0, lam - first_mom - cutoff * tail)
        self._law = DiscreteLaw(pmf, tail_mass=tail, tail_cdf_gap=gap)

    def law(self):
        return self._law

    def sample(self, rng, size):
        return rng.poisson(self.lam, size).astype(np.int64)

    @property
    def mean(self):
        return self.lam

    def params(self):
        return {"kind": self.kind, "mean": self.lam}


class ZipfMarginal(Marginal):
    """Zipf with finite corpus: P(X=t) proportional to t^-exponent on 1..corpus."""

    kind = "zipf"

    def __init__(self, exponent: float, corpus: int):
        if exponent <= 1 or corpus < 1:
            raise InvalidLaw("zipf needs exponent > 1 and corpus >= 1")
        self.exponent = float(exponent)
        self.corpus = int(corpus)
        t = np.arange(self.corpus + 1, dtype=np.float64)
        w = np.zeros(self.corpus + 1)
        w[1:] = t[1:] ** -self.exponent
        self._law = DiscreteLaw(w / w.sum())

    def law(self):
        return self._law

    @property
    def moment_order_bound(self):
        return math.inf  # finite corpus

    def params(self):
        return {"kind": self.kind, "exponent": self.exponent, "corpus": self.corpus}


def _log_upper_gamma(s: float, x: float) -> float:
    """log Gamma(s, x) (upper incomplete), for x > 0 and any real s."""
    if s > 1e-12:
        return math.log(special.gammaincc(s, x)) + special.gammaln(s)
    if abs(s) <= 1e-12:
        return math.log(special.exp1(x))
    # downward recurrence Gamma(s,x) = (Gamma(s+1,x) - x^s e^-x) / s
    g = math.exp(_log_upper_gamma(s + 1.0, x))
    val = (g - x**s * math.exp(-x)) / s
    if val <= 0:
        raise ArithmeticError("upper incomplete gamma recurrence lost precision")
    return math.log(val)


class PoissonParetoMarginal(Marginal):
    """Poisson with a Pareto-distributed rate.

    Lambda has density shape * scale^shape * x^-(shape+1) on [scale, inf);
    conditionally on Lambda the value is Poisson(Lambda).  The pmf has the
    closed form  p(k) = shape * scale^shape * Gamma(k - shape, scale) / k!,
    evaluated in log space (upper incomplete gamma); the asymptotic tail is
    Pareto-like with index ``shape``.
    """

    kind = "poisson_pareto"

    def __init__(self, shape: float, scale: float = 1.0,
                 tail_tol: float = HEAVY_TAIL_TOL):
        if shape <= 1.0:
            raise InvalidLaw("need shape > 1 for a finite mean")
        if scale <= 0:
            raise InvalidLaw("scale must be positive")
        self.shape = float(shape)
        self.scale = float(scale)
        self.tail_tol = float(tail_tol)

    @cached_property
    def _law_cached(self) -> DiscreteLaw:
        a, s, tol = self.shape, self.scale, self.tail_tol
        cutoff = int(math.ceil(s * (2.0 / tol) ** (1.0 / a))) + 2
        k = np.arange(cutoff, dtype=np.float64)
        logp = np.empty(cutoff)
        lo = int(math.floor(a)) + 1  # below this k - a <= 0
        for kk in range(min(lo, cutoff)):
            logp[kk] = _log_upper_gamma(kk - a, s) - special.gammaln(kk + 1)
        if cutoff > lo:
            kk = k[lo:]
            logp[lo:] = (
                np.log(special.gammaincc(kk - a, s))
                + special.gammaln(kk - a)
                - special.gammaln(kk + 1)
            )
        pmf = math.exp(math.log(a) + a * math.log(s)) * np.exp(logp)
        tail = max(0.0, 1.0 - float(pmf.sum()))
        # exact CDF-tail remainder via E[(X-C)+] = E[X] - E[min(X, C)]
        first_mom = float(k @ pmf)
        gap = max(0.0, self.mean - first_mom - cutoff * tail)
        return DiscreteLaw(pmf, tail_mass=tail, tail_cdf_gap=gap)

    def law(self):
        return self._law_cached

    def sample(self, rng, size):
        # exact compounding: Pareto rate by inverse CDF, then Poisson
        lam = self.scale * rng.random(size) ** (-1.0 / self.shape)
        return rng.poisson(lam).astype(np.int64)

    @property
    def mean(self):
        return self.shape * self.scale / (self.shape - 1.0)

    @property
    def moment_order_bound(self):
        return self.shape

    def pmf_by_quadrature(self, k: int, tol: float = 1e-10) -> float:
        """Independent evaluation of p(k) by adaptive quadrature."""
        from scipy import integrate

        a, s = self.shape, self.scale

        def integrand(lam):
            return math.exp(
                k * math.log(lam) - lam - special.gammaln(k + 1)
            ) * a * s**a * lam ** (-a - 1.0)

        # split at the Poisson peak so the finite panel carries the mass
        mid = max(s + 1.0, 2.0 * k + 20.0)
        head, _ = integrate.quad(integrand, s, mid, epsabs=tol, epsrel=tol,
                                 limit=400, points=[max(s, float(k))])
        tail, _ = integrate.quad(integrand, mid, np.inf, epsabs=tol,
                                 epsrel=tol, limit=400)
        return head + tail

    def params(self):
        return {"kind": self.kind, "shape": self.shape, "scale": self.scale}


_MARGINAL_KINDS = {
    cls.kind: cls
    for cls in (PointMassMarginal, TableMarginal, GeometricMarginal,
                PoissonMarginal, ZipfMarginal, PoissonParetoMarginal)
}


def marginal_from_json(obj: dict) -> Marginal:
    kind = obj.get("kind")
    if kind not in _MARGINAL_KINDS:
        raise InvalidLaw(f"unknown marginal kind {kind!r}")
    args = {key: val for key, val in obj.items() if key != "kind"}
    return _MARGINAL_KINDS[kind](**args)


# ---------------------------------------------------------------------------
# Wasserstein-1 on integer laws
# ---------------------------------------------------------------------------


def wasserstein1(p: DiscreteLaw, q: DiscreteLaw) -> float:
    """Kantorovich-Rubinstein distance: sum over k of |F_p(k) - F_q(k)|.

    Evaluated over the union of retained supports; see
    :func:`d1_truncation_error` for the bound on what truncation may hide.
    """
    short, long_, flipped = (p, q, False) if p.tail_cutoff <= q.tail_cutoff else (q, p, True)
    ls, ll = short.tail_cutoff, long_.tail_cutoff
    head = float(np.abs(short.cdf - long_.cdf[:ls]).sum())
    if ll == ls:
        return head
    if short.tail_mass == 0.0:
        # F_short is exactly 1 beyond its support: the remainder is the
        # cached suffix sum of (1 - F_long).
        return head + float(long_._one_minus_cdf_suffix[ls])
    rest = float(np.abs(short.total - long_.cdf[ls:]).sum())
    return head + rest


def d1_truncation_error(p: DiscreteLaw, q: DiscreteLaw) -> float:
    """Upper bound on the part of d1 that truncation removed."""
    return p.tail_cdf_gap + q.tail_cdf_gap


# ---------------------------------------------------------------------------
# Joint degree laws
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class JointDegreeLaw:
    """Prescribed joint law of a node's (in-degree, out-degree) pair.

    The marginal mean nu is exact whenever the marginal has a closed
    form; the stub-weighted mean mu comes from the retained pmfs.  For
    truncated heavy-tailed laws the two conventions differ by less than
    the tracked tail remainder, far below every tolerance in play.
    """

    kind: str
    minus: Marginal | None = None
    plus: Marginal | None = None
    table: tuple | None = None  # (d_minus, d_plus, probs) arrays for "explicit"
    _mean_tol: float = field(default=1e-9, repr=False)

    def __post_init__(self):
        if self.kind not in ("d_regular", "independent", "equal", "explicit"):
            raise InvalidLaw(f"unknown joint law kind {self.kind!r}")
        if self.kind == "explicit":
            dm, dp, pr = self.table
            if abs(float(dm @ pr) - float(dp @ pr)) > self._mean_tol:
                raise InvalidLaw("explicit joint law has unequal marginal means")
        elif self.kind == "independent":
            if abs(self.minus.mean - self.plus.mean) > self._mean_tol:
                raise InvalidLaw("independent marginals must share their mean")

    # -- constructors ------------------------------------------------------

    @staticmethod
    def d_regular(d: int) -> "JointDegreeLaw":
        m = PointMassMarginal(d)
        return JointDegreeLaw("d_regular", minus=m, plus=m)

    @staticmethod
    def independent(minus: Marginal, plus: Marginal) -> "JointDegreeLaw":
        return JointDegreeLaw("independent", minus=minus, plus=plus)

    @staticmethod
    def equal(marginal: Marginal) -> "JointDegreeLaw":
        return JointDegreeLaw("equal", minus=marginal, plus=marginal)

    @staticmethod
    def explicit(d_minus, d_plus, probs) -> "JointDegreeLaw":
        dm = np.asarray(d_minus, dtype=np.int64)
        dp = np.asarray(d_plus, dtype=np.int64)
        pr = np.asarray(probs, dtype=np.float64)
        if dm.shape != dp.shape or dm.shape != pr.shape:
            raise InvalidLaw("explicit law arrays must have matching shapes")
        if np.any(dm < 0) or np.any(dp < 0) or np.any(pr < 0):
            raise InvalidLaw("explicit law entries must be nonnegative")
        if abs(pr.sum() - 1.0) > 1e-9:
            raise InvalidLaw("explicit law probabilities must sum to 1")
        dm.flags.writeable = False
        dp.flags.writeable = False
        pr.flags.writeable = False
        return JointDegreeLaw("explicit", table=(dm, dp, pr))

    # -- marginal and size-biased pmfs ------------------------------------

    def marginal_laws(self) -> tuple[DiscreteLaw, DiscreteLaw]:
        """(g_minus, g_plus): laws of the in- and out-degree."""
        if self.kind == "explicit":
            dm, dp, pr = self.table
            gm = _trim(np.bincount(dm, weights=pr))
            gp = _trim(np.bincount(dp, weights=pr))
            return DiscreteLaw(gm), DiscreteLaw(gp)
        return self.minus.law(), self.plus.law()

    @cached_property
    def nu(self) -> float:
        """Common marginal mean E[D-] = E[D+]."""
        if self.kind == "explicit":
            dm, _, pr = self.table
            return float(dm @ pr)
        return (self.minus.mean + self.plus.mean) / 2.0

    @cached_property
    def mu(self) -> float:
        """Size-biased mean E[D- D+] / nu."""
        if self.nu <= 0:
            raise DegenerateLaw("nu = 0: size-biased law undefined")
        if self.kind == "d_regular":
            return float(self.minus.value)
        if self.kind == "independent":
            return self.minus.law().mean * self.plus.law().mean / self.nu
        if self.kind == "equal":
            return self.minus.law().moment(2.0) / self.nu
        dm, dp, pr = self.table
        return float((dm * dp) @ pr) / self.nu

    @property
    def is_supercritical(self) -> bool:
        return self.mu > 1.0

    def size_biased(self) -> tuple[DiscreteLaw, DiscreteLaw]:
        """(f_plus, f_minus): degree laws seen by following a uniform stub.

        f_plus(t) = E[1(D+ = t) D-] / nu and symmetrically; both have
        mean mu.
        """
        if self.nu <= 0:
            raise DegenerateLaw("nu = 0: size-biased law undefined")
        if self.kind == "d_regular":
            law = self.minus.law()
            return law, law
        if self.kind == "independent":
            # independence makes the biasing weight constant in t
            return self.plus.law(), self.minus.law()
        if self.kind == "equal":
            g = self.minus.law()
            t = np.arange(g.tail_cutoff, dtype=np.float64)
            w = t * g.pmf / self.nu
            tail = max(0.0, 1.0 - float(w.sum()))
            f = DiscreteLaw(w, tail_mass=tail)
            return f, f
        dm, dp, pr = self.table
        fp = _trim(np.bincount(dp, weights=dm * pr)) / self.nu
        fm = _trim(np.bincount(dm, weights=dp * pr)) / self.nu
        return DiscreteLaw(fp), DiscreteLaw(fm)

    # -- moments for the joint moment condition ---------------------------

    @cached_property
    def default_kappa(self) -> float:
        """A kappa for which E[((D-)^k + (D+)^k) D+ D-] is comfortably finite."""
        if self.kind in ("d_regular", "explicit"):
            return 1.0
        bound = min(self.minus.moment_order_bound, self.plus.moment_order_bound)
        need = 1.0 if self.kind == "independent" else 2.0
        slack = bound - need
        if slack >= 1.25:
            return 1.0
        return max(0.05, round(0.8 * slack, 2))

    def kappa_moment(self, kappa: float) -> float:
        """E[((D-)^kappa + (D+)^kappa) D+ D-] from the retained pmfs."""
        if self.kind == "d_regular":
            d = float(self.minus.value)
            return 2.0 * d ** (2.0 + kappa)
        if self.kind == "independent":
            lm, lp = self.minus.law(), self.plus.law()
            return lm.moment(1 + kappa) * lp.mean + lm.mean * lp.moment(1 + kappa)
        if self.kind == "equal":
            return 2.0 * self.minus.law().moment(2.0 + kappa)
        dm, dp, pr = self.table
        dmf, dpf = dm.astype(float), dp.astype(float)
        return float(((dmf**kappa + dpf**kappa) * dmf * dpf) @ pr)

    # -- sampling ----------------------------------------------------------

    def sample_pairs(self, rng: np.random.Generator, n: int):
        """n i.i.d. (in-degree, out-degree) pairs from the joint law."""
        if self.kind == "d_regular":
            d = self.minus.value
            return (np.full(n, d, dtype=np.int64), np.full(n, d, dtype=np.int64))
        if self.kind == "independent":
            return self.minus.sample(rng, n), self.plus.sample(rng, n)
        if self.kind == "equal":
            vals = self.minus.sample(rng, n)
            return vals, vals.copy()
        dm, dp, pr = self.table
        idx = rng.choice(dm.size, size=n, p=pr)
        return dm[idx].astype(np.int64), dp[idx].astype(np.int64)

    # -- config ------------------------------------------------------------

    def to_json(self) -> dict:
        if self.kind == "d_regular":
            return {"kind": "d_regular", "d": self.minus.value}
        if self.kind == "independent":
            return {"kind": "independent", "minus": self.minus.params(),
                    "plus": self.plus.params()}
        if self.kind == "equal":
            return {"kind": "equal", "marginal": self.minus.params()}
        dm, dp, pr = self.table
        return {"kind": "explicit", "d_minus": dm.tolist(),
                "d_plus": dp.tolist(), "probs": pr.tolist()}


def size_biased_law(law: JointDegreeLaw) -> tuple[DiscreteLaw, DiscreteLaw]:
    """(f_plus, f_minus) of a joint law; see JointDegreeLaw.size_biased."""
    return law.size_biased()


def law_from_json(obj: dict) -> JointDegreeLaw:
    kind = obj.get("kind")
    if kind == "d_regular":
        return JointDegreeLaw.d_regular(int(obj["d"]))
    if kind == "independent":
        return JointDegreeLaw.independent(
            marginal_from_json(obj["minus"]), marginal_from_json(obj["plus"])
        )
    if kind == "equal":
        return JointDegreeLaw.equal(marginal_from_json(obj["marginal"]))
    if kind == "explicit":
        return JointDegreeLaw.explicit(obj["d_minus"], obj["d_plus"], obj["probs"])
    raise InvalidLaw(f"unknown joint law kind {kind!r}")


def parse_law(spec: str) -> JointDegreeLaw:
    """Parse compact CLI law specs.

    Accepted forms: ``dregular:D``, ``zipf-equal:EXPONENT,CORPUS``,
    ``pp-independent:SHAPE[,SCALE]``, ``geometric-equal:SUCCESS``,
    ``poisson-independent:MEAN``.
    """
    name, _, argstr = spec.partition(":")
    args = [a for a in argstr.split(",") if a] if argstr else []
    try:
        if name == "dregular":
            return JointDegreeLaw.d_regular(int(args[0]))
        if name == "zipf-equal":
            return JointDegreeLaw.equal(ZipfMarginal(float(args[0]), int(args[1])))
        if name == "pp-independent":
            scale = float(args[1]) if len(args) > 1 else 1.0
            return JointDegreeLaw.independent(
                PoissonParetoMarginal(float(args[0]), scale),
                PoissonParetoMarginal(float(args[0]), scale),
            )
        if name == "geometric-equal":
            return JointDegreeLaw.equal(GeometricMarginal(float(args[0])))
        if name == "poisson-independent":
            return JointDegreeLaw.independent(
                PoissonMarginal(float(args[0])), PoissonMarginal(float(args[0]))
            )
    except (IndexError, ValueError) as exc:
        raise InvalidLaw(f"cannot parse law spec {spec!r}: {exc}") from exc
    raise InvalidLaw(f"unknown law spec {spec!r}")
