"""Published closed-form energies used as analysis and accuracy fixtures."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .symreg.expr import Add, Const, Exp, Expression, Ln, Mul, X, diff_expr, evaluate

# Treloar rubber, discovered additive energy
TRELOAR_C = dict(c11=0.1502, c12=0.0771, c13=0.0665, c21=0.0035, c0=261.5397)
# particle-reinforced composite, discovered additive energy
COMPOSITE_C = dict(c11=0.06948, c12=1.82532e-6, c13=-0.05967, c21=0.91519, c22=0.0069682, c0=15.87993107)

# analysis intervals: lower end at the incompressible bound I >= 2, upper end
# covering the Treloar measurements (largest I1 is about 58.2, largest I2 about 388.7)
FIXTURE_INTERVALS = {
    "treloar": ((2.0, 58.2), (2.0, 388.8)),
    "composite": ((2.0, 100.0), (2.0, 100.0)),
}


def _pow(x: Expression, n: int) -> Expression:
    out = x
    for _ in range(n - 1):
        out = Mul(out, x)
    return out


def treloar_pair():
    c = TRELOAR_C
    psi1 = Add(Mul(Const(c["c11"]), X), Mul(Const(c["c12"]), Exp(Mul(Const(c["c13"]), X))))
    psi2 = Mul(Const(c["c21"]), X)
    return psi1, psi2


def composite_pair():
    c = COMPOSITE_C
    psi1 = Add(Add(Mul(Const(c["c11"]), X), Mul(Const(c["c12"]), _pow(X, 4))),
               Exp(Mul(Const(c["c13"]), X)))
    psi2 = Add(Mul(Const(c["c21"]), X), Mul(Mul(Const(c["c22"]), _pow(X, 2)), Ln(X)))
    return psi1, psi2


@dataclass(frozen=True)
class ExpressionEnergy:
    """psi(I1, I2) = psi1(I1) + psi2(I2) from two expression trees."""

    psi1: Expression
    psi2: Expression

    def grads(self, i1, i2):
        i1 = np.atleast_1d(np.asarray(i1, dtype=float))
        i2 = np.atleast_1d(np.asarray(i2, dtype=float))
        return evaluate(diff_expr(self.psi1), i1), evaluate(diff_expr(self.psi2), i2)

    def energy(self, i1, i2):
        return evaluate(self.psi1, np.atleast_1d(i1)) + evaluate(self.psi2, np.atleast_1d(i2))


@dataclass(frozen=True)
class ReferenceTreloarEnergy:
    """Competing I1-only Treloar model with nested square roots (comparison only)."""

    def energy(self, i1, i2=None):
        i1 = np.asarray(i1, dtype=float)
        inner = 0.93296 * np.exp(0.08031 * i1) + np.sqrt(i1 - 0.080316) + (0.0232113 * i1 + 0.021633) * i1
        return np.sqrt(inner)

    def grads(self, i1, i2):
        i1 = np.asarray(i1, dtype=float)
        inner = 0.93296 * np.exp(0.08031 * i1) + np.sqrt(i1 - 0.080316) + (0.0232113 * i1 + 0.021633) * i1
        d_inner = (0.93296 * 0.08031 * np.exp(0.08031 * i1) + 0.5 / np.sqrt(i1 - 0.080316)
                   + 2.0 * 0.0232113 * i1 + 0.021633)
        return d_inner / (2.0 * np.sqrt(inner)), np.zeros_like(np.asarray(i2, dtype=float))
