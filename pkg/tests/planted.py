"""Planted recovery problem shared by the oracle tests."""

import math

import numpy as np

from mimpac.model import ActiveIndexSet, AffineMap, Dataset, ModelState, predict_many, sparse_matrix
from mimpac.prior import PriorSpec
from mimpac.wavelet import CoefficientVector


def planted_problem(seed, n=400, p=6):
    """Noiseless data from a sparse two-column row and a three-coefficient link inside the ball."""
    rng = np.random.default_rng(seed)
    I = ActiveIndexSet(((1, 4),))
    spec = PriorSpec(p=p, n=n, C=10.0, N=8, link_map=AffineMap.covering(math.sqrt(2), 7, 8))
    row = rng.standard_normal(2)
    theta = sparse_matrix(I, [row / np.linalg.norm(row)], p)
    dic = spec.dictionary(1, 1)
    beta = np.zeros(dic.size)
    pick = rng.choice(dic.size, 3, replace=False)
    beta[pick] = rng.standard_normal(3)
    beta *= 9.0 / np.dot(dic.weights, np.abs(beta))
    truth = ModelState(I, theta, CoefficientVector(beta, dic), spec.link_map)
    X = rng.uniform(-1, 1, size=(n, p))
    return I, spec, Dataset(X, predict_many(truth, X))
