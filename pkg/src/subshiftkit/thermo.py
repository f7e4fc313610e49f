"""Closed-form entropy and pressure bounds.

Every bound is a sum of terms of the form ``q * ln(x1) * ... * ln(xm)`` with an
exact rational q, plus the binary entropy of epsilon, which has no such form.
Log arguments are split into prime factors (trial division, with any large
cofactor kept whole), so two renderings of the same bound that differ only in
how logs are grouped compare equal exactly.  Decimal values are evaluated at a
configurable precision only at the end.

Nothing here simulates a measure: the mass of the complement of the
"ones" cylinder enters as the scalar input ``mu_complement``.
"""
from __future__ import annotations

from dataclasses import dataclass
from decimal import Decimal, localcontext
from fractions import Fraction
from typing import Iterable, Mapping, Sequence

from ._util import frac_str, int_str
from .errors import BadInput, ConstraintViolation
from .params import ParamState, mirror
from .words import zero_count

DEFAULT_PRECISION = 50
DEFAULT_D = 2
# alphabet sizes: the visible alphabet {0,1,2}, its duplication {0',0'',1,2},
# and a placeholder size for the simulating layer
CARD_A_TILDE = 3
CARD_A = 4
CARD_A_HAT = 2
_TRIAL_LIMIT = 10**4


# ---------------------------------------------------------------------------
# exact sums of products of logarithms

def _factor(n: int) -> tuple[int, ...]:
    if n < 2:
        raise BadInput(f"log argument must be an integer >= 2, got {n}")
    out = []
    p = 2
    while p * p <= n and p < _TRIAL_LIMIT:
        while n % p == 0:
            out.append(p)
            n //= p
        p += 1 if p == 2 else 2
    if n > 1:
        out.append(n)
    return tuple(out)


class LogLinear:
    """Exact sum of rational multiples of products of logs of integers."""

    __slots__ = ("terms",)

    def __init__(self, terms: Mapping[tuple[int, ...], Fraction] | None = None):
        self.terms = {key: Fraction(q) for key, q in (terms or {}).items() if q}

    @classmethod
    def const(cls, q) -> "LogLinear":
        return cls({(): Fraction(q)})

    @classmethod
    def log(cls, n: int, coeff=1) -> "LogLinear":
        """coeff * ln(n), expanded over the factors of n."""
        out: dict = {}
        for p in _factor(n):
            out[(p,)] = out.get((p,), Fraction(0)) + Fraction(coeff)
        return cls(out)

    def __add__(self, other: "LogLinear") -> "LogLinear":
        out = dict(self.terms)
        for key, q in other.terms.items():
            out[key] = out.get(key, Fraction(0)) + q
        return LogLinear(out)

    def __neg__(self) -> "LogLinear":
        return LogLinear({key: -q for key, q in self.terms.items()})

    def __sub__(self, other: "LogLinear") -> "LogLinear":
        return self + (-other)

    def scale(self, q) -> "LogLinear":
        q = Fraction(q)
        return LogLinear({key: c * q for key, c in self.terms.items()})

    def __mul__(self, other: "LogLinear") -> "LogLinear":
        out: dict = {}
        for k1, q1 in self.terms.items():
            for k2, q2 in other.terms.items():
                key = tuple(sorted(k1 + k2))
                out[key] = out.get(key, Fraction(0)) + q1 * q2
        return LogLinear(out)

    def __eq__(self, other) -> bool:
        return isinstance(other, LogLinear) and self.terms == other.terms

    def __hash__(self):
        return hash(frozenset(self.terms.items()))

    def is_zero(self) -> bool:
        return not self.terms

    def rational(self) -> Fraction | None:
        """The value if it has no log factors, else None."""
        if not self.terms:
            return Fraction(0)
        if set(self.terms) == {()}:
            return self.terms[()]
        return None

    def coefficient(self, key: tuple[int, ...]) -> Fraction:
        return self.terms.get(tuple(sorted(key)), Fraction(0))

    def value(self, precision: int = DEFAULT_PRECISION) -> Decimal:
        with localcontext() as ctx:
            ctx.prec = precision + 10
            logs: dict[int, Decimal] = {}
            total = Decimal(0)
            for key, q in self.terms.items():
                v = _dec(q)
                for atom in key:
                    if atom not in logs:
                        logs[atom] = Decimal(atom).ln()
                    v *= logs[atom]
                total += v
            ctx.prec = precision
            return +total

    def render(self) -> str:
        if not self.terms:
            return "0"
        parts = []
        for key in sorted(self.terms, key=lambda t: (len(t), t)):
            q = self.terms[key]
            logs = "*".join(f"ln({int_str(a)})" for a in key)
            if not key:
                parts.append(frac_str(q))
            elif q == 1:
                parts.append(logs)
            else:
                parts.append(f"{frac_str(q)}*{logs}")
        return " + ".join(parts).replace("+ -", "- ")

    def __repr__(self) -> str:
        return f"LogLinear({self.render()})"


def _dec(q: Fraction) -> Decimal:
    return Decimal(q.numerator) / Decimal(q.denominator)


# ---------------------------------------------------------------------------
# inputs

@dataclass(frozen=True)
class BoundInputs:
    """Everything the upper bound at level k needs.

    ``prev`` is the level k-1 state; it supplies the k-1 frequencies and N_{k-1}.
    """
    k: int
    state: ParamState
    prev: ParamState
    R_prime: int
    C_prime: int
    D: int = DEFAULT_D
    card_A: int = CARD_A
    card_A_tilde: int = CARD_A_TILDE
    card_A_hat: int = CARD_A_HAT

    def __post_init__(self):
        if self.state.k != self.k or self.prev.k != self.k - 1:
            raise BadInput(f"states for levels {self.prev.k}, {self.state.k} do not match k={self.k}")
        for name in ("card_A", "card_A_tilde", "card_A_hat", "D"):
            if getattr(self, name) < 2:
                raise BadInput(f"{name} must be >= 2")
        if self.C_prime < 1:
            raise BadInput("C_prime must be >= 1")
        if self.state.ell_prime is not None and self.R_prime < self.state.ell_prime:
            raise BadInput(f"R_prime={self.R_prime} is below ell'_k={self.state.ell_prime}")

    def mirrored(self) -> "BoundInputs":
        return BoundInputs(self.k, mirror(self.state), mirror(self.prev), self.R_prime, self.C_prime,
                           self.D, self.card_A, self.card_A_tilde, self.card_A_hat)

    def to_json(self) -> dict:
        return {"k": self.k, "R_prime": int_str(self.R_prime), "C_prime": int_str(self.C_prime),
                "D": self.D, "card_A": self.card_A, "card_A_tilde": self.card_A_tilde,
                "card_A_hat": self.card_A_hat}


def surrogate_reconstruction(n: int, K: int = 1) -> int:
    """R(n) = n K^n."""
    return n * K**n


def surrogate_complexity(n: int, K: int = 1) -> int:
    """C(n) = n^2 K^n."""
    return n * n * K**n


def surrogate_inputs(states: Sequence[ParamState], k: int, K: int = 1, **kw) -> BoundInputs:
    """Inputs with R'_k = 2 R(ell'_k) + 1 and C'_k = C(ell'_k) from the surrogate family."""
    if k < 1 or k >= len(states):
        raise BadInput(f"level {k} not available")
    if K < 1:
        raise BadInput("surrogate base K must be >= 1")
    ell_p = states[k].ell_prime
    return BoundInputs(k, states[k], states[k - 1], 2 * surrogate_reconstruction(ell_p, K) + 1,
                       surrogate_complexity(ell_p, K), **kw)


# ---------------------------------------------------------------------------
# lower bounds

def entropy_lower_bound(state: ParamState, which: str = "B") -> Fraction:
    """Coefficient f of the entropy lower bound f * ln 2 for the concatenated subshift."""
    return state.freq(which)


@dataclass(frozen=True)
class PressureLowerBound:
    frequency: Fraction
    penalty: Fraction

    @property
    def expr(self) -> LogLinear:
        return LogLinear.log(2, self.frequency) - LogLinear.const(self.penalty)

    def value(self, precision: int = DEFAULT_PRECISION) -> Decimal:
        return self.expr.value(precision)

    def to_json(self, precision: int = DEFAULT_PRECISION) -> dict:
        return {"frequency": frac_str(self.frequency), "penalty": frac_str(self.penalty),
                "exact": self.expr.render(), "decimal": str(self.value(precision))}


def pressure_lower_bound(state: ParamState, D: int = DEFAULT_D, which: str = "B") -> PressureLowerBound:
    """f ln 2 - 2 D beta / ell."""
    if D < 1:
        raise BadInput("D must be >= 1")
    return PressureLowerBound(state.freq(which), Fraction(2 * D * state.beta, state.ell))


# ---------------------------------------------------------------------------
# epsilon and binary entropy

def epsilon_coefficient(inputs: BoundInputs) -> Fraction:
    """(R')^2 / beta; epsilon is this times ln card(A)."""
    if inputs.state.beta <= 0:
        raise BadInput("epsilon is undefined for beta = 0")
    return Fraction(inputs.R_prime**2, inputs.state.beta)


def epsilon_k(inputs: BoundInputs) -> LogLinear:
    return LogLinear.log(inputs.card_A, epsilon_coefficient(inputs))


def binary_entropy(e, precision: int = DEFAULT_PRECISION) -> Decimal:
    """-e ln e - (1-e) ln(1-e), with the endpoints set to 0."""
    with localcontext() as ctx:
        ctx.prec = precision + 10
        e = _dec(e) if isinstance(e, Fraction) else Decimal(e)
        if e < 0 or e > 1:
            raise ConstraintViolation(f"binary entropy needs 0 <= e <= 1, got {e}")
        out = Decimal(0)
        if 0 < e < 1:
            out = -e * e.ln() - (1 - e) * (1 - e).ln()
        ctx.prec = precision
        return +out


# ---------------------------------------------------------------------------
# upper bound

STATEMENT, PROOF = "statement", "proof"


@dataclass(frozen=True)
class BoundTerm:
    name: str
    expr: LogLinear | None
    decimal: Decimal
    note: str = ""

    def to_json(self) -> dict:
        return {"term_name": self.name,
                "exact_coefficient": self.expr.render() if self.expr is not None else None,
                "decimal_value": str(self.decimal), **({"note": self.note} if self.note else {})}


@dataclass(frozen=True)
class UpperBound:
    k: int
    mu_complement: Fraction
    form: str
    terms: tuple[BoundTerm, ...]
    total: Decimal
    precision: int

    @property
    def exact_part(self) -> LogLinear:
        """Sum of every term that has an exact rendering."""
        out = LogLinear()
        for t in self.terms:
            if t.expr is not None:
                out = out + t.expr
        return out

    def term(self, name: str) -> BoundTerm:
        return next(t for t in self.terms if t.name == name)

    def to_json(self) -> dict:
        return {"k": self.k, "mu_complement": frac_str(self.mu_complement), "form": self.form,
                "terms": [t.to_json() for t in self.terms], "total": str(self.total)}


def _range_error(term: str, message: str) -> ConstraintViolation:
    return ConstraintViolation(f"{term} term: {message}")


def _upper_pieces(inputs: BoundInputs, mu, form: str) -> list[tuple[str, LogLinear | None, str]]:
    k, st, prev = inputs.k, inputs.state, inputs.prev
    # even k: B is the duplicated dictionary and A leaks; odd k swaps them
    dup, leak = ("B", "A") if k % 2 == 0 else ("A", "B")
    if st.n_prime is None or st.n_prime < 1:
        raise _range_error("a_leak", f"N'_{k} is undefined")
    if prev.n_big is None:
        raise _range_error("duplication", f"N_{k - 1} is undefined at k={k}")
    if prev.n_big < 2:
        raise _range_error("duplication", f"(1 - 1/N_{k - 1})^-1 needs N_{k - 1} >= 2, got {prev.n_big}")
    if st.ell_prime is None or st.ell_prime < 1:
        raise _range_error("boundary", f"ell'_{k} is undefined")
    eps = epsilon_k(inputs)
    ln2 = LogLinear.log(2)
    inflate = Fraction(prev.n_big, prev.n_big - 1)
    f_dup, f_leak = prev.freq(dup), prev.freq(leak)
    ln_tilde = LogLinear.log(inputs.card_A_tilde)
    pieces = [
        ("a_leak", LogLinear.log(2, Fraction(2, st.n_prime) * f_leak), ""),
        ("duplication", (LogLinear.const(mu) + eps).scale(inflate * f_dup) * ln2, ""),
        ("boundary", ln_tilde.scale(Fraction(1, st.ell_prime)), ""),
        ("complexity", LogLinear.log(inputs.C_prime, Fraction(1, st.ell_prime**2))
         if inputs.C_prime > 1 else LogLinear(), ""),
    ]
    if form == STATEMENT:
        pieces.append(("epsilon_hat", eps * LogLinear.log(2 * inputs.card_A_hat), "eps * ln(2 card(A_hat))"))
    else:
        pieces.append(("epsilon_two", eps * ln2, "eps * ln 2"))
        pieces.append(("epsilon_hat", eps * LogLinear.log(inputs.card_A_hat), "eps * ln card(A_hat)"))
    pieces.append(("epsilon_tilde", eps * ln_tilde, "eps * ln card(A_tilde)"))
    pieces.append(("reconstruction_boundary", ln_tilde.scale(Fraction(8, inputs.R_prime)), ""))
    return pieces


def pressure_upper_bound_rhs(inputs: BoundInputs, mu_complement, precision: int = DEFAULT_PRECISION,
                             form: str = PROOF) -> UpperBound:
    """Itemized right-hand side of the pressure upper bound at level k.

    ``form`` selects how the epsilon correction is grouped: "statement" keeps
    eps * ln(2 card(A_hat)) as one term, "proof" splits off eps * ln 2.  The two
    have identical exact parts.
    """
    if form not in (STATEMENT, PROOF):
        raise BadInput(f"unknown form {form!r}")
    mu = Fraction(mu_complement)
    if not 0 <= mu <= 1:
        raise _range_error("duplication", f"mu_complement must lie in [0, 1], got {mu}")
    terms = [BoundTerm(name, expr, expr.value(precision), note)
             for name, expr, note in _upper_pieces(inputs, mu, form)]
    eps_coeff = epsilon_coefficient(inputs)
    eps_val = LogLinear.log(inputs.card_A, eps_coeff).value(precision + 10)
    if not 0 <= eps_val <= 1:
        raise _range_error("binary_entropy", f"epsilon = {eps_val:.6e} is outside [0, 1]")
    h = binary_entropy(eps_val, precision)
    terms.append(BoundTerm("binary_entropy", None, h, f"H({frac_str(eps_coeff)}*ln({inputs.card_A}))"))
    with localcontext() as ctx:
        ctx.prec = precision + 10
        total = sum((t.decimal for t in terms), Decimal(0))
        ctx.prec = precision
        total = +total
    return UpperBound(inputs.k, mu, form, tuple(terms), total, precision)


def duplication_slope(inputs: BoundInputs) -> LogLinear:
    """d(upper bound)/d(mu_complement): (1 - 1/N_{k-1})^-1 f_{k-1} ln 2."""
    prev = inputs.prev
    dup = "B" if inputs.k % 2 == 0 else "A"
    if prev.n_big is None or prev.n_big < 2:
        raise _range_error("duplication", f"N_{inputs.k - 1} must be >= 2")
    return LogLinear.log(2, Fraction(prev.n_big, prev.n_big - 1) * prev.freq(dup))


# ---------------------------------------------------------------------------
# chaotic double estimate

NO_FORCING = "no forcing at this k"


@dataclass(frozen=True)
class ChaoticRow:
    k: int
    parity: str
    lower: Decimal
    upper_at_zero: Decimal
    slope: Decimal
    implied_mu: Decimal
    implied_exact: str
    residual: Decimal
    verdict: str
    precision: int = DEFAULT_PRECISION

    @property
    def roundtrip_ok(self) -> bool:
        return self.residual == 0 or abs(self.residual).adjusted() < -(self.precision - 5)

    def to_json(self) -> dict:
        return {"k": self.k, "parity": self.parity, "L_k": str(self.lower), "U_k_at_mu0": str(self.upper_at_zero),
                "slope": str(self.slope), "implied_mu_bound": str(self.implied_mu),
                "implied_mu_exact": self.implied_exact, "roundtrip_residual": str(self.residual),
                "verdict": self.verdict}

    def csv_row(self) -> list[str]:
        return [str(self.k), self.parity, str(self.lower), str(self.upper_at_zero), str(self.implied_mu)]


CHAOTIC_CSV_HEADER = ["k", "parity", "L_k", "U_k_at_mu0", "implied_mu_bound"]


def _chaotic_row(inputs: BoundInputs, precision: int) -> ChaoticRow:
    k = inputs.k
    even = k % 2 == 0
    # the lower bound uses the dictionary the upper bound duplicates
    lower = pressure_lower_bound(inputs.state, inputs.D, "B" if even else "A")
    base = pressure_upper_bound_rhs(inputs, 0, precision)
    slope = duplication_slope(inputs)
    work = precision + 20
    with localcontext() as ctx:
        ctx.prec = work
        l_val = lower.expr.value(work)
        u0 = pressure_upper_bound_rhs(inputs, 0, work).total
        c = slope.value(work)
        mu_star = (l_val - u0) / c
        # substitute back: U(mu*) is affine in mu, so rebuild it from the pieces
        u_star = u0 + c * mu_star
        residual = (l_val - u_star) / max(abs(l_val), Decimal(1))
        ctx.prec = precision
        mu_star, l_val, u0, c, residual = +mu_star, +l_val, +u0, +c, +residual
    numer = lower.expr - base.exact_part
    exact = f"(({numer.render()}) - {base.term('binary_entropy').note}) / ({slope.render()})"
    verdict = NO_FORCING if mu_star <= 0 else f"mu_complement >= {mu_star:.6e}"
    return ChaoticRow(k, "even" if even else "odd", l_val, base.total, c, mu_star, exact, residual, verdict,
                      precision)


def chaotic_report(inputs: Iterable[BoundInputs], precision: int = DEFAULT_PRECISION) -> list[ChaoticRow]:
    """Per level: the lower bound L, the upper bound U(mu) = U(0) + c mu, and mu* solving L = U(mu*).

    mu* is a lower bound on the mass the equilibrium measure must give to the
    complement of the cylinder of 1 (k even) or 2 (k odd).
    """
    rows = [_chaotic_row(inp, precision) for inp in inputs]
    ks = [r.k for r in rows]
    if ks != sorted(set(ks)):
        raise BadInput("chaotic_report needs increasing distinct levels")
    return rows


def upper_bound_at(inputs: BoundInputs, mu: Decimal, precision: int = DEFAULT_PRECISION) -> Decimal:
    """U(mu) for a decimal mu, used to check the chaotic round trip independently."""
    with localcontext() as ctx:
        ctx.prec = precision + 20
        u0 = pressure_upper_bound_rhs(inputs, 0, precision + 20).total
        out = u0 + duplication_slope(inputs).value(precision + 20) * mu
        ctx.prec = precision
        return +out


# ---------------------------------------------------------------------------
# counting

def dictionary_log_count(states: Sequence[ParamState], k: int, dict_id: str, height: int,
                         word=None) -> int:
    """log2 of the number of duplications of a vertically aligned dictionary word.

    Without ``word`` the dictionary's maximal zero count is used, giving
    height * rho_k; a specific word contributes height * (its zero count).
    """
    if not 0 <= k < len(states):
        raise BadInput(f"level {k} not available")
    if dict_id not in ("A", "B"):
        raise BadInput(f"dictionary must be 'A' or 'B', got {dict_id!r}")
    if height < 0:
        raise BadInput("height must be >= 0")
    if word is None:
        return height * states[k].rho(dict_id)
    return height * zero_count(word)
