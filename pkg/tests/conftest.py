import json
import math
from importlib import resources

import numpy as np
import pytest

from pomtrans import dynamics, sfg

TWO_PI = 2 * math.pi


@pytest.fixture(scope="session")
def nominal_params() -> dynamics.TransducerParams:
    text = resources.files("pomtrans.data").joinpath("nominal_params.json").read_text("utf-8")
    return dynamics.params_from_dict(json.loads(text))


def random_valid_params(rng: np.random.Generator, supplied_gamma_ex: bool = False,
                        with_wavelength: bool = False) -> dynamics.TransducerParams:
    """Random physically valid parameter record.

    Rates are drawn log-uniform around the magnitudes of a GHz-scale device.
    When ``supplied_gamma_ex`` is set the supplied value stays at or below the
    derived total mechanical linewidth, keeping the record passive.
    """
    def logu(lo, hi):
        return float(np.exp(rng.uniform(np.log(lo), np.log(hi))))

    omega_m = TWO_PI * logu(0.5e9, 10e9)
    gamma_0 = TWO_PI * logu(0.1e6, 20e6)
    Gamma = TWO_PI * logu(1e9, 50e9)
    Gamma_0 = Gamma * rng.uniform(0.005, 0.5)
    g_em = TWO_PI * logu(10e6, 500e6)
    J = omega_m / 2
    kappa_1 = TWO_PI * logu(5e6, 200e6)
    kappa_02 = TWO_PI * logu(5e6, 200e6)
    kappa_ex2 = TWO_PI * logu(20e6, 1000e6)
    g_om = TWO_PI * logu(100, 10e3)
    gamma_ex = None
    if supplied_gamma_ex:
        gamma_m = gamma_0 + 4 * g_em**2 / Gamma
        gamma_ex = gamma_m * rng.uniform(0.05, 1.0)
    return dynamics.TransducerParams(
        omega_m=omega_m, gamma_0=gamma_0, Gamma_0=Gamma_0, Gamma=Gamma,
        g_em=g_em, J=J, delta_1=omega_m, delta_2=omega_m,
        kappa_1=kappa_1, kappa_02=kappa_02, kappa_ex2=kappa_ex2, g_om=g_om,
        gamma_ex=gamma_ex,
        lambda_l=1.55e-6 if with_wavelength else None,
    )


def random_graph(rng: np.random.Generator, n_nodes: int | None = None,
                 acyclic: bool = False, omega_dependent: bool = True):
    """Random signal flow graph with one guaranteed source and sink.

    Gains are kept small enough that loop products stay bounded; graphs whose
    determinant gets close to zero anywhere relevant are simply regenerated by
    the caller.  Returns (graph, source id, sink id).
    """
    n = int(n_nodes if n_nodes is not None else rng.integers(3, 8))
    names = [f"n{i}" for i in range(n)]
    src, dst = names[0], names[-1]

    def gain_fn():
        c = complex(rng.uniform(-0.8, 0.8), rng.uniform(-0.8, 0.8)) / n
        if omega_dependent and rng.random() < 0.5:
            tau = float(rng.uniform(0.1, 2.0))
            return lambda w, c=c, tau=tau: c / (1 - 1j * w * tau)
        return lambda w, c=c: c

    edges = {}
    # a guaranteed route so src -> dst exists
    route = names[0:1] + sorted(rng.permutation(names[1:-1]).tolist()) + names[-1:]
    for u, v in zip(route, route[1:]):
        edges[(u, v)] = sfg.SfgEdge(u, v, gain_fn())
    n_extra = int(rng.integers(n, 3 * n))
    for _ in range(n_extra):
        i, j = rng.integers(0, n, size=2)
        if i == j:
            continue
        if acyclic and i >= j:
            i, j = min(i, j), max(i, j)
            if i == j:
                continue
        u, v = names[i], names[j]
        if u == dst or v == src:
            continue  # keep src a source and dst a sink
        if (u, v) not in edges:
            edges[(u, v)] = sfg.SfgEdge(u, v, gain_fn())
    return sfg.SignalFlowGraph.from_edges(edges.values()), src, dst
