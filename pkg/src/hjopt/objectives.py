"""Built-in objective corpus.

Every entry is bounded, continuous, and attains its minimum on the declared
domain.  The Lipschitz and semiconcavity constants are the suprema of |f'|
and of directional second derivatives over that domain (rounded up; the
test suite probes them by finite differences).  ``counterexample_H`` is the
profile whose running cost |x| exp(-x^2) stays positive away from the
minimizer but decays at infinity, so the positivity-at-infinity hypothesis
fails on large boxes; its target must be built from ``known_argmin``.
"""
from __future__ import annotations

import numpy as np

from .fields import ObjectiveFunction

_PI = np.pi


def _constant(x):
    x = np.asarray(x, dtype=float)
    return np.full(x.shape[:-1], 3.0)


def _quadratic_1d(x):
    x = np.asarray(x, dtype=float)
    return 0.5 * x[..., 0] ** 2


def _double_well_1d(x):
    x = np.asarray(x, dtype=float)
    return (x[..., 0] ** 2 - 1.0) ** 2


def _double_well_2d(x):
    x = np.asarray(x, dtype=float)
    return np.sum((x ** 2 - 1.0) ** 2, axis=-1)


def _rastrigin(x, amp=2.0):
    x = np.asarray(x, dtype=float)
    return np.sum(x ** 2 + amp * (1.0 - np.cos(2.0 * _PI * x)), axis=-1)


def _flat_bottom_1d(x):
    x = np.asarray(x, dtype=float)
    return np.maximum(np.abs(x[..., 0]) - 0.5, 0.0) ** 2


def _counterexample_h(x):
    x = np.asarray(x, dtype=float)
    t = x[..., 0]
    return 0.5 * t ** 2 * np.exp(-2.0 * t ** 2)


def _box(lo, hi, dim):
    return (tuple([float(lo)] * dim), tuple([float(hi)] * dim))


CORPUS: dict[str, ObjectiveFunction] = {}


def _register(obj: ObjectiveFunction) -> None:
    CORPUS[obj.name] = obj


_register(ObjectiveFunction(
    evaluator=_constant, name="constant_1d", dim=1,
    known_min=3.0, known_argmin=((0.0,),),
    lipschitz_C1=0.0, semiconcave_C2=0.0, domain=_box(-2, 2, 1),
    description="f == 3; every point is a minimizer"))

_register(ObjectiveFunction(
    evaluator=_constant, name="constant_2d", dim=2,
    known_min=3.0, known_argmin=((0.0, 0.0),),
    lipschitz_C1=0.0, semiconcave_C2=0.0, domain=_box(-1, 1, 2),
    description="f == 3 on the plane"))

_register(ObjectiveFunction(
    evaluator=_quadratic_1d, name="quadratic_1d", dim=1,
    known_min=0.0, known_argmin=((0.0,),),
    lipschitz_C1=1.0, semiconcave_C2=1.0, domain=_box(-1, 1, 1),
    description="x^2/2; unique minimizer at 0"))

_register(ObjectiveFunction(
    evaluator=_double_well_1d, name="double_well_1d", dim=1,
    known_min=0.0, known_argmin=((-1.0,), (1.0,)),
    lipschitz_C1=24.0, semiconcave_C2=44.0, domain=_box(-2, 2, 1),
    description="(x^2-1)^2; minimizers at +-1"))

_register(ObjectiveFunction(
    evaluator=_double_well_2d, name="double_well_2d", dim=2,
    known_min=0.0,
    known_argmin=((-1.0, -1.0), (-1.0, 1.0), (1.0, -1.0), (1.0, 1.0)),
    lipschitz_C1=10.7, semiconcave_C2=23.0, domain=_box(-1.5, 1.5, 2),
    description="sum (x_i^2-1)^2; four minimizers"))

_register(ObjectiveFunction(
    evaluator=_rastrigin, name="rastrigin_1d", dim=1,
    known_min=0.0, known_argmin=((0.0,),),
    lipschitz_C1=17.2, semiconcave_C2=81.0, domain=_box(-2.5, 2.5, 1),
    description="x^2 + 2(1-cos 2 pi x); multiwell, global minimum at 0"))

_register(ObjectiveFunction(
    evaluator=_rastrigin, name="rastrigin_2d", dim=2,
    known_min=0.0, known_argmin=((0.0, 0.0),),
    lipschitz_C1=21.4, semiconcave_C2=81.0, domain=_box(-1.5, 1.5, 2),
    description="separable multiwell, global minimum at the origin"))

_register(ObjectiveFunction(
    evaluator=_flat_bottom_1d, name="flat_bottom_1d", dim=1,
    known_min=0.0, known_argmin=((-0.5,), (0.0,), (0.5,)),
    lipschitz_C1=3.0, semiconcave_C2=2.0, domain=_box(-2, 2, 1),
    description="(|x|-0.5)_+^2; interval of minimizers [-1/2, 1/2]"))

_register(ObjectiveFunction(
    evaluator=_counterexample_h, name="counterexample_H", dim=1,
    known_min=0.0, known_argmin=((0.0,),),
    lipschitz_C1=0.21, semiconcave_C2=1.0, domain=_box(-6, 6, 1),
    description="x^2 exp(-2x^2)/2; running cost |x| exp(-x^2) decays at "
                "infinity, violating positivity away from the minimizer"))


def get_objective(name: str) -> ObjectiveFunction:
    try:
        return CORPUS[name]
    except KeyError:
        known = ", ".join(sorted(CORPUS))
        raise KeyError(f"unknown objective {name!r}; corpus: {known}") from None


def list_objectives(name_filter: str | None = None) -> list[ObjectiveFunction]:
    objs = [CORPUS[k] for k in sorted(CORPUS)]
    if name_filter:
        objs = [o for o in objs if name_filter in o.name]
    return objs
