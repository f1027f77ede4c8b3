from typing import Final

DEFAULT_LAMBDA: Final = 0.01

# below the reward of any fitting configuration within twice the latency bound
INFEASIBLE_REWARD: Final = -2.0


def reward(l_m: float,
           l_t: float,
           acc_q: float,
           acc_b: float,
           lam: float = DEFAULT_LAMBDA) -> float:
    """
    Returns
    -------
    float
        (l_t - l_m) / l_t - 1 if the model latency `l_m` misses the bound `l_t`,
        else (acc_q - acc_b) * lam
    """
    if l_t <= 0:
        raise ValueError(f"latency bound must be > 0 but is {l_t}")
    if l_m > l_t:
        return (l_t - l_m) / l_t - 1.0
    return (acc_q - acc_b) * lam
