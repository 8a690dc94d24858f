"""Random operation pipelines over random register layouts, for reversibility checks."""
import numpy as np

from qnt import statevec as sv


def random_layout(rng, max_size=4096):
    while True:
        n = int(rng.integers(2, 5))
        dims = [int(d) for d in rng.integers(1, 17, size=n)]
        if np.prod(dims) <= max_size and max(dims) >= 2:
            return sv.RegisterLayout([(f"r{i}", d) for i, d in enumerate(dims)])


def random_state(rng, layout):
    amps = rng.normal(size=layout.shape) + 1j * rng.normal(size=layout.shape)
    return sv.QState(layout, amps / np.linalg.norm(amps))


def _table_predicate(rng, layout, names):
    table = rng.random(tuple(layout.dim(n) for n in names)) < 0.4
    return sv.PhasePredicate.table(names, table)


def _dim_table(rng, layout, control, target):
    tab = rng.integers(1, layout.dim(target) + 1, size=layout.dim(control))
    return lambda v, tab=tab: tab[v]


def random_op(rng, layout):
    names = list(layout.names)
    t, c = (str(x) for x in rng.choice(names, size=2, replace=False))
    dim_t = layout.dim(t)
    kind = int(rng.integers(9))
    if kind == 0:
        return sv.DFT(t, int(rng.integers(1, dim_t + 1)), bool(rng.integers(2)))
    if kind == 1:
        return sv.ControlledDFT(c, t, _dim_table(rng, layout, c, t), bool(rng.integers(2)))
    if kind == 2:
        gate = _table_predicate(rng, layout, (c,)) if rng.integers(2) else None
        return sv.PhaseFlipZero((t,), gate)
    if kind == 3:
        return sv.PhaseOracle(_table_predicate(rng, layout, (t, c)))
    if kind == 4:
        return sv.Diffusion(t, int(rng.integers(1, dim_t + 1)))
    if kind == 5:
        dim = sv.ControlledDim(c, _dim_table(rng, layout, c, t))
        return sv.GroverStep(t, dim, _table_predicate(rng, layout, (c, t)), bool(rng.integers(2)))
    if kind == 6:
        rest = [n for n in names if n not in (t, c)]
        dim = sv.ControlledDim(rest[0], _dim_table(rng, layout, rest[0], t)) if rest else dim_t
        return sv.ControlledGroverPower((c,), t, dim, _table_predicate(rng, layout, (t,)))
    if kind == 7:
        return sv.GlobalPhase(np.exp(1j * rng.uniform(0, 2 * np.pi)))
    return sv.ControlledPower(c, sv.DFT(t))


def random_pipeline(rng, layout, max_len=50):
    return [random_op(rng, layout) for _ in range(int(rng.integers(1, max_len + 1)))]


def pipeline_drift(seed):
    """Worst norm drift and forward-then-adjoint distance for one random pipeline."""
    rng = np.random.default_rng(seed)
    layout = random_layout(rng)
    start = random_state(rng, layout)
    state = start.copy()
    worst = 0.0
    with state.record() as tape:
        for op in random_pipeline(rng, layout):
            state.apply(op)
            worst = max(worst, abs(state.norm() - 1))
    sv.run_adjoint(state, tape)
    return worst, float(np.linalg.norm(state.vector - start.vector))
