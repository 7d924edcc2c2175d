from scipy.stats import beta


def clopper_pearson(k: int, n: int, confidence: float = 0.99) -> tuple[float, float]:
    """Two-sided exact binomial interval for k successes in n trials."""
    if n <= 0:
        raise ValueError("need at least one trial")
    a = 1.0 - confidence
    lo = 0.0 if k == 0 else float(beta.ppf(a / 2, k, n - k + 1))
    hi = 1.0 if k == n else float(beta.ppf(1 - a / 2, k + 1, n - k))
    return lo, hi
