import numpy as np

class RankingHingeLoss:
    """Linear ranking-SVM objective over pairwise difference vectors:
    0.5 * ||w||^2 + C * sum(max(0, 1 - w . (x+ - x-)))"""

    def __init__(self, c: float = 1.0):
        if c <= 0:
            raise ValueError(f"C must be positive, got {c}")
        self.c = c

    def margins(self, weights: np.ndarray, diffs: np.ndarray) -> np.ndarray:
        return diffs @ weights

    def __call__(self, weights: np.ndarray, diffs: np.ndarray) -> float:
        hinge = np.maximum(0.0, 1.0 - self.margins(weights, diffs))
        return float(0.5 * weights @ weights + self.c * hinge.sum())

    def subgradient(self, weights: np.ndarray, diffs: np.ndarray, scale: float = 1.0) -> np.ndarray:
        """
        Subgradient at weights. With a minibatch of diffs, scale rescales the
        hinge term to the full pair count.
        """
        active = self.margins(weights, diffs) < 1.0
        return weights - self.c * scale * diffs[active].sum(axis=0)
