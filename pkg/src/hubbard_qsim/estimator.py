"""scikit-learn style facade over the correlation pipeline."""
from __future__ import annotations

import itertools

import numpy as np
from sklearn.base import BaseEstimator
from sklearn.utils.validation import check_is_fitted

from .greens import (DEFAULT_ETA, DEFAULT_TAU_MAX, DEFAULT_TAU_STEP, all_pairs, measure_series,
                     nambu_from_probes, retarded_fourier, retarded_kernel)
from .hamiltonian import build_full
from .jordan_wigner import all_orbitals
from .simulator import gibbs_state
from .validation import check_choice, check_cluster, check_grid, check_positive


class HubbardGreensFunction(BaseEstimator):
    """Cluster Green's function from simulated probe measurements.

    ``fit`` prepares the Gibbs state and measures every probe correlation
    on the time grid; ``predict(omega)`` returns the retarded Green's
    function matrix ``G[w, a, b]`` with orbitals ordered by qubit index.
    There is no training data: ``X`` and ``y`` are accepted and ignored so
    the object composes with the usual tooling.
    """

    def __init__(self, cluster="1d:2", t=1.0, U=8.0, mu_p=0.0, M_p=0.0, delta_s=0.0, delta_d=0.0,
                 beta=1.0, eta=DEFAULT_ETA, tau_max=DEFAULT_TAU_MAX, tau_step=DEFAULT_TAU_STEP,
                 evolution="exact", dt=0.01, method="circuit"):
        self.cluster = cluster
        self.t = t
        self.U = U
        self.mu_p = mu_p
        self.M_p = M_p
        self.delta_s = delta_s
        self.delta_d = delta_d
        self.beta = beta
        self.eta = eta
        self.tau_max = tau_max
        self.tau_step = tau_step
        self.evolution = evolution
        self.dt = dt
        self.method = method

    def fit(self, X=None, y=None):
        spec = check_cluster(self.cluster, t=self.t, U=self.U, mu_p=self.mu_p, M_p=self.M_p,
                             delta_s=self.delta_s, delta_d=self.delta_d)
        beta = check_positive(self.beta, "beta", allow_zero=True)
        check_positive(self.eta, "eta")
        step = check_positive(self.tau_step, "tau_step")
        tau_max = check_positive(self.tau_max, "tau_max")
        check_choice(self.evolution, ("exact", "ts2", "ruth"), "evolution")
        check_choice(self.method, ("circuit", "oracle"), "method")

        self.spec_ = spec
        self.orbitals_ = all_orbitals(spec.L_c)
        self.taus_ = np.arange(int(round(tau_max / step)) + 1) * step
        self.rho_ = gibbs_state(build_full(spec), beta)
        self.series_ = measure_series(spec, self.rho_, all_pairs(spec.L_c), self.taus_,
                                      self.evolution, self.dt, self.method)
        self.nambu_ = {(i, j): nambu_from_probes(self.series_, i, j)
                       for i, j in itertools.product(self.orbitals_, repeat=2)}
        return self

    def predict(self, omega) -> np.ndarray:
        check_is_fitted(self, "nambu_")
        omega = check_grid(omega, "omega")
        n = len(self.orbitals_)
        out = np.zeros((omega.size, n, n), dtype=complex)
        for a, i in enumerate(self.orbitals_):
            for b, j in enumerate(self.orbitals_):
                kernel = retarded_kernel(self.nambu_[(i, j)])
                out[:, a, b] = retarded_fourier(kernel, self.taus_, omega, self.eta)
        return out

    def spectral_function(self, omega) -> np.ndarray:
        """``-Im G_aa(omega) / pi`` for every orbital, shape ``(len(omega), n)``."""
        g = self.predict(omega)
        return -np.imag(np.diagonal(g, axis1=1, axis2=2)) / np.pi
