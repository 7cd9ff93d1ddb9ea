"""Expected DC inventory under the shortage/surplus scenarios of the (q, r) policy.

Every DC is in one of three scenarios determined by the annual inflow
``n*q`` against the assigned mean demand and the safety stock
``z * sqrt(lead * var_sum)``:

* shortage (``t=1``): inflow below demand;
* small surplus (``t=0, t'=0``): surplus no larger than the safety stock;
* large surplus (``t=0, t'=1``): surplus above the safety stock.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from statistics import NormalDist

_STD_NORMAL = NormalDist()


def z_quantile(alpha: float) -> float:
    """Standard normal quantile ``z`` with ``Phi(z) = alpha``."""
    if not 0.0 < alpha < 1.0:
        raise ValueError(f"alpha must lie in (0, 1), got {alpha}")
    return _STD_NORMAL.inv_cdf(alpha)


def safety_stock(var_sum: float, lead: float, z_alpha: float) -> float:
    return z_alpha * math.sqrt(lead * var_sum)


@dataclass(frozen=True)
class DcInventoryState:
    mu_sum: float
    var_sum: float
    n: int
    q: float
    lead_time: float
    z_alpha: float

    @property
    def inflow(self) -> float:
        return self.n * self.q

    @property
    def safety(self) -> float:
        return safety_stock(self.var_sum, self.lead_time, self.z_alpha)

    @property
    def scenario(self) -> tuple[int, int]:
        return classify(self.mu_sum, self.var_sum, self.n, self.q, self.lead_time, self.z_alpha)


def classify(mu_sum: float, var_sum: float, n: int, q: float, lead: float, z_alpha: float) -> tuple[int, int]:
    """Scenario bits ``(t, t')``; equalities resolve to ``(0, 0)``."""
    gap = mu_sum - n * q
    if gap > 0:
        return 1, 0
    surplus = -gap
    return 0, int(surplus > safety_stock(var_sum, lead, z_alpha))


def inventory_terms(mu_sum: float, inflow: float, safety: float, t: int, t_prime: int) -> float:
    """The four-term expected-inventory expression for given scenario bits."""
    return (
        t * (mu_sum - inflow)
        + t * safety
        + (1 - t) * (inflow - mu_sum)
        + (1 - t) * (1 - t_prime) * (safety - (inflow - mu_sum))
    )


def expected_inventory(state: DcInventoryState) -> float:
    t, tp = state.scenario
    return inventory_terms(state.mu_sum, state.inflow, state.safety, t, tp)


def expected_inventory_closed_form(mu_sum: float, inflow: float, safety: float) -> float:
    if inflow >= mu_sum:
        return max(safety, inflow - mu_sum)
    return (mu_sum - inflow) + safety
