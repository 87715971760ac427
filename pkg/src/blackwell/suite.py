"""Reference fixture checks, run by ``blackwell paper-suite``."""

from __future__ import annotations

from dataclasses import dataclass

from .blackwell_order import Verdict, blackwell_dominates, expected_indirect_utility, matching_utility, threshold_utility, verify_garbling
from .errors import NonGeneric, ZeroEntry
from .experiment import discretize_example1, power, product, threshold_garbling
from .fixtures import azrieli, azrieli_margin, eventualfail, example1, footnote3
from .large_deviations import eta_search
from .large_sample import catalyst, dominance_vector
from .renyi import DominatesOnGrid, FailsAt, default_grid, renyi_order_check, renyi_values

AZRIELI_MINIMAL_N = 4


@dataclass(frozen=True)
class SuiteRow:
    name: str
    passed: bool
    detail: str


def check_footnote3(grid_points: int = 512) -> SuiteRow:
    P, Q = footnote3()
    grid = default_grid(grid_points=grid_points)
    gap1 = renyi_values(P, 1, grid) - renyi_values(Q, 1, grid)
    gap0 = float(renyi_values(Q, 0, 3.0) - renyi_values(P, 0, 3.0))
    ok = bool(gap1.min() > 1e-9 and gap0 > 1e-9)
    return SuiteRow("footnote3", ok, f"min R1 gap {gap1.min():.3g}, R0(3) gap {gap0:.3g}")


def example1_payoffs(p: float = 0.63, n_bins: int = 1000) -> tuple[float, float]:
    P, Q = example1(p, n_bins)
    v = matching_utility()
    return expected_indirect_utility(P, v), expected_indirect_utility(Q, v)


def check_example1() -> SuiteRow:
    garbled = verify_garbling(discretize_example1(2), example1(0.625)[1], threshold_garbling(2))
    fine = verify_garbling(discretize_example1(1000), example1(0.625)[1], threshold_garbling(1000))
    up, uq = example1_payoffs()
    verdict = renyi_order_check(*example1(0.63, None))
    ok = garbled and fine and uq > up + 1e-6 and isinstance(verdict, DominatesOnGrid)
    return SuiteRow("example1", ok, f"garbling {garbled and fine}, payoffs {up:.6f} < {uq:.6f}, renyi {verdict}")


def check_example2() -> SuiteRow:
    vec = dominance_vector(*azrieli(0.305, 0.1), cap=3, with_theory=False).vector
    ok = vec == [Verdict.INCOMPARABLE, Verdict.DOMINATES, Verdict.INCOMPARABLE]
    return SuiteRow("example2", ok, "n=1..3: " + ", ".join(str(v) for v in vec))


def check_azrieli(cap: int = 64) -> SuiteRow:
    P, Q = azrieli(0.25, 1 / 16)
    margin = azrieli_margin(0.25, 1 / 16)
    report = dominance_vector(P, Q, cap=cap, with_theory=False)
    verdict = renyi_order_check(P, Q)
    ok = margin > 0 and isinstance(verdict, DominatesOnGrid) and report.minimal_n == AZRIELI_MINIMAL_N
    return SuiteRow("azrieli", ok, f"margin {margin:.4f}, minimal_n {report.minimal_n}")


def threshold_payoff(E, n: int) -> float:
    x = 100.0 ** (n - 1)
    return expected_indirect_utility(E, threshold_utility(x / (x + 1)))


def check_eventualfail(eps: float = 1e-4, n_max: int = 4) -> SuiteRow:
    try:
        eventualfail(1e-3)
        rejected = False
    except ZeroEntry:
        rejected = True
    P, Q = eventualfail(eps)
    try:
        eta_search(P, Q, check_order=False)
        nongeneric = False
    except NonGeneric:
        nongeneric = True
    renyi_ok = isinstance(renyi_order_check(P, Q), DominatesOnGrid)
    wins = all(threshold_payoff(power(Q, n), n) > threshold_payoff(power(P, n), n) for n in range(1, n_max + 1))
    ok = rejected and nongeneric and renyi_ok and wins
    return SuiteRow("eventualfail", ok, f"eps=1e-3 rejected {rejected}, eps={eps:g}: nongeneric {nongeneric}, renyi {renyi_ok}, Q wins n<= {n_max} {wins}")


def check_catalyst() -> SuiteRow:
    P, Q = azrieli(0.305, 0.1)
    R = catalyst(P, Q, 2)
    v = blackwell_dominates(product(P, R), product(Q, R))
    return SuiteRow("catalyst", v is Verdict.DOMINATES, f"|R|={R.size}, P(x)R vs Q(x)R: {v}")


def check_footnote3_witness() -> SuiteRow:
    v = renyi_order_check(*footnote3())
    ok = isinstance(v, FailsAt) and v.theta == 0 and 2 < v.t <= 3
    return SuiteRow("footnote3-witness", ok, str(v))


CHECKS = (check_footnote3, check_footnote3_witness, check_example1, check_example2, check_azrieli, check_eventualfail, check_catalyst)


def run_suite() -> list[SuiteRow]:
    rows = []
    for check in CHECKS:
        try:
            rows.append(check())
        except Exception as exc:  # report, do not abort the table
            rows.append(SuiteRow(check.__name__.removeprefix("check_"), False, f"error: {exc!r}"))
    return rows


def format_table(rows: list[SuiteRow]) -> str:
    width = max(len(r.name) for r in rows)
    lines = [f"{r.name:<{width}}  {'PASS' if r.passed else 'FAIL'}  {r.detail}" for r in rows]
    lines.append(f"{sum(r.passed for r in rows)}/{len(rows)} passed")
    return "\n".join(lines)

