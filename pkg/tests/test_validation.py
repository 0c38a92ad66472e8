from __future__ import annotations

import numpy as np
import pytest

from hubbard_qsim.hamiltonian import ClusterSpec
from hubbard_qsim.validation import (check_choice, check_cluster, check_density_matrix, check_grid,
                                     check_positive, check_unitary)


class TestChecks:
    def test_cluster(self):
        spec = check_cluster("2x2", U=3.0)
        assert isinstance(spec, ClusterSpec) and spec.U == 3.0
        assert check_cluster(spec) is spec
        assert check_cluster(spec, t=2.0).t == 2.0
        with pytest.raises(TypeError):
            check_cluster(4)

    def test_positive(self):
        assert check_positive(2, "x") == 2.0
        assert check_positive(0, "x", allow_zero=True) == 0.0
        for bad in (0, -1, float("nan"), float("inf")):
            with pytest.raises(ValueError):
                check_positive(bad, "x")

    def test_choice(self):
        assert check_choice("a", ("a", "b"), "opt") == "a"
        with pytest.raises(ValueError):
            check_choice("c", ("a", "b"), "opt")

    def test_grid(self):
        assert check_grid([0, 1, 2], "g", uniform=True, start_zero=True).shape == (3,)
        for bad, kw in [([1], {}), ([0, 0], {}), ([0, 1, 3], dict(uniform=True)), ([1, 2], dict(start_zero=True))]:
            with pytest.raises(ValueError):
                check_grid(bad, "g", **kw)

    def test_density_matrix(self):
        check_density_matrix(np.eye(2) / 2, 1)
        for bad in (np.eye(2), np.diag([1.5, -0.5]), np.array([[0.5, 1], [0, 0.5]]), np.eye(4) / 4):
            with pytest.raises(ValueError):
                check_density_matrix(bad, 1)

    def test_unitary(self):
        check_unitary(np.array([[0, 1j], [1j, 0]]))
        with pytest.raises(ValueError):
            check_unitary(np.ones((2, 2)))
        with pytest.raises(ValueError):
            check_unitary(np.ones(3))
