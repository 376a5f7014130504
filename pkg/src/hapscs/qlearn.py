"""Tabular Q-learning on the cell-switching problem, in two state
designs sharing the action space and cost.

The full-scale design (FSD) identifies states with rows of the
enumerated on/off configuration table, so its table is 2^n x 2^n and
observing a state means locating the applied configuration in that
table.  The lightweight design (LSD) compresses the state to the count
of over-capacity BSs, giving n+2 states.  Actions are the 2^n policies
for both.  Costs are minimised; untried actions sit at the optimistic
zero, which keeps exploration alive as the exploration rate decays.
"""

from __future__ import annotations

import csv
import enum
import time
from dataclasses import dataclass, field
from typing import Sequence

import numpy as np

from .optimize import LoadsView, PolicyEvaluation, ViewMode, evaluate_policy, policy_matrix
from .power import Policy

__all__ = [
    "AgentKind",
    "AgentConfig",
    "QTable",
    "TrainResult",
    "TrainedAgent",
    "FSD_CELL_CAP",
    "fsd_state",
    "lsd_state",
    "select_action",
    "q_update",
    "train",
    "save_qtable_csv",
    "load_qtable_csv",
    "dump_training_trace_csv",
]

# Refuse FSD tables beyond this many cells; the table grows O(2^(2n)).
FSD_CELL_CAP = 1 << 12


class AgentKind(enum.Enum):
    FSD = "FSD"
    LSD = "LSD"


@dataclass(frozen=True)
class AgentConfig:
    learning_rate: float = 0.9
    discount: float = 0.9          # 0.9 for FSD, 0.3 for LSD per defaults below
    epsilon0: float = 0.8
    decay: float = 0.9
    iterations: int = 20_000

    def __post_init__(self):
        if not 0.0 < self.learning_rate <= 1.0:
            raise ValueError("learning_rate must lie in (0, 1]")
        if not 0.0 <= self.discount < 1.0:
            raise ValueError("discount must lie in [0, 1)")
        if not 0.0 <= self.epsilon0 <= 1.0:
            raise ValueError("epsilon0 must lie in [0, 1]")
        if not 0.0 < self.decay <= 1.0:
            raise ValueError("decay must lie in (0, 1]")
        if self.iterations < 0:
            raise ValueError("iterations must be >= 0")


DEFAULT_DISCOUNT = {AgentKind.FSD: 0.9, AgentKind.LSD: 0.3}


def default_config(kind: AgentKind, **overrides) -> AgentConfig:
    base = dict(discount=DEFAULT_DISCOUNT[kind])
    base.update(overrides)
    return AgentConfig(**base)


@dataclass
class QTable:
    """Cost-to-go table plus visit counters, zero-initialised."""

    values: np.ndarray
    visit_counts: np.ndarray

    @classmethod
    def create(cls, n_states: int, n_actions: int) -> "QTable":
        if n_states <= 0 or n_actions <= 0:
            raise ValueError("table dimensions must be positive")
        return cls(
            values=np.zeros((n_states, n_actions)),
            visit_counts=np.zeros((n_states, n_actions), dtype=np.int64),
        )

    @classmethod
    def for_kind(cls, kind: AgentKind, n: int, cell_cap: int = FSD_CELL_CAP) -> "QTable":
        actions = 1 << n
        if kind is AgentKind.FSD:
            cells = actions * actions
            if cells > cell_cap:
                raise MemoryError(
                    f"FSD table for n={n} needs 2^{2 * n} = {cells} cells, "
                    f"over the cap of {cell_cap}; the table grows O(2^(2n))"
                )
            return cls.create(actions, actions)
        return cls.create(n + 2, actions)

    @property
    def n_states(self) -> int:
        return self.values.shape[0]

    @property
    def n_actions(self) -> int:
        return self.values.shape[1]


def fsd_state(previous_policy: Policy, matrix: np.ndarray | None = None) -> int:
    """Locate the applied configuration in the enumerated table.

    The result equals the binary value of the bit vector; the lookup
    scans the configuration table because that table is the state
    space.
    """
    if matrix is None:
        matrix = policy_matrix(len(previous_policy))
    bits = previous_policy.as_array()
    hits = np.flatnonzero((matrix == bits).all(axis=1))
    if hits.size != 1:
        raise ValueError(f"policy {previous_policy} not found in the state table")
    return int(hits[0])


def lsd_state(load_fractions: Sequence[float]) -> int:
    """Number of BSs whose load strictly exceeds capacity."""
    return int(np.count_nonzero(np.asarray(load_fractions) > 1.0))


def select_action(
    table: QTable,
    state: int,
    epsilon: float,
    explore_draw: float,
    action_draw: float,
) -> int:
    """Epsilon-greedy over one table row; costs are minimised.

    Both uniform draws are passed in so the choice is deterministic.
    Exploitation takes the argmin with ties to the lowest action index.
    """
    if not 0 <= state < table.n_states:
        raise ValueError(f"state {state} out of range")
    if explore_draw < epsilon:
        action = int(action_draw * table.n_actions)
        return min(action, table.n_actions - 1)
    return int(np.argmin(table.values[state]))


def q_update(
    table: QTable,
    state: int,
    action: int,
    cost: float,
    next_state: int,
    config: AgentConfig,
) -> float:
    """One Bellman backup on a single cell; returns the new value."""
    old = table.values[state, action]
    target = cost + config.discount * table.values[next_state].min()
    new = old + config.learning_rate * (target - old)
    table.values[state, action] = new
    table.visit_counts[state, action] += 1
    return float(new)


@dataclass
class TrainResult:
    table: QTable
    iteration_costs: np.ndarray            # mean decision cost per episode
    trace_rows: list[tuple] = field(default_factory=list)
    agent_seconds: float = 0.0             # time in agent-side work only


class TrainedAgent:
    """Greedy decision wrapper around a trained table."""

    def __init__(self, kind: AgentKind, table: QTable, n: int):
        self.kind = kind
        self.table = table
        self.n = n
        self.matrix = policy_matrix(n)

    def observe(self, applied_policy: Policy, view: LoadsView, mode: ViewMode) -> int:
        if self.kind is AgentKind.FSD:
            return fsd_state(applied_policy, self.matrix)
        return lsd_state(view.fractions(mode))

    def decide(self, applied_policy: Policy, view: LoadsView, mode: ViewMode) -> Policy:
        state = self.observe(applied_policy, view, mode)
        action = int(np.argmin(self.table.values[state]))
        return Policy(tuple(int(b) for b in self.matrix[action]))


def _next_state(
    kind: AgentKind, action: int, evaluation: PolicyEvaluation
) -> int:
    if kind is AgentKind.FSD:
        # the state after acting is the configuration just applied
        return action
    return lsd_state(evaluation.predicted_loads)


def train(
    kind: AgentKind,
    env,
    config: AgentConfig,
    rng: np.random.Generator,
    cell_cap: int = FSD_CELL_CAP,
    record_trace: bool = False,
    timing: bool = False,
) -> TrainResult:
    """Run episodic training against a slot environment.

    ``env`` supplies ``n_sbs``, ``slots_per_episode``, ``mode``,
    ``reset() -> view`` (starts an episode with every BS on) and
    ``step(policy) -> view`` (realises one slot under the policy).
    Per episode the exploration rate restarts at its initial value and
    decays once per slot.  The decision cost of an action is the
    candidate evaluation of that action against the decision-time view,
    exactly what the exhaustive search minimises.
    """
    n = env.n_sbs
    table = QTable.for_kind(kind, n, cell_cap)
    matrix = policy_matrix(n)
    mode = env.mode
    episode_costs = np.zeros(max(config.iterations, 0))
    trace: list[tuple] = []
    clock = time.perf_counter
    agent_s = 0.0

    for episode in range(config.iterations):
        view = env.reset()
        applied = Policy.all_on(n)
        epsilon = config.epsilon0
        cost_sum = 0.0
        decided = 0
        for slot in range(1, env.slots_per_episode):
            t0 = clock() if timing else 0.0
            if kind is AgentKind.FSD:
                state = fsd_state(applied, matrix)
            else:
                state = lsd_state(view.fractions(mode))
            action = select_action(
                table, state, epsilon, float(rng.random()), float(rng.random())
            )
            policy = Policy(tuple(int(b) for b in matrix[action]))
            evaluation = evaluate_policy(policy, view, mode)
            nxt = _next_state(kind, action, evaluation)
            q_update(table, state, action, evaluation.cost, nxt, config)
            if timing:
                agent_s += clock() - t0
            if record_trace:
                trace.append((episode, slot, state, action, evaluation.cost, epsilon))
            cost_sum += evaluation.cost
            decided += 1
            epsilon *= config.decay
            view = env.step(policy)
            applied = policy
        episode_costs[episode] = cost_sum / decided if decided else 0.0
    return TrainResult(
        table=table, iteration_costs=episode_costs, trace_rows=trace, agent_seconds=agent_s
    )


def save_qtable_csv(table: QTable, path) -> None:
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(["state", "action", "value", "visits"])
        for s in range(table.n_states):
            for a in range(table.n_actions):
                writer.writerow([s, a, repr(table.values[s, a]), int(table.visit_counts[s, a])])


def load_qtable_csv(path) -> QTable:
    rows = []
    with open(path, newline="") as fh:
        reader = csv.DictReader(fh)
        if reader.fieldnames != ["state", "action", "value", "visits"]:
            raise ValueError(f"unexpected Q-table header: {reader.fieldnames}")
        for row in reader:
            rows.append(
                (int(row["state"]), int(row["action"]), float(row["value"]), int(row["visits"]))
            )
    n_states = max(r[0] for r in rows) + 1
    n_actions = max(r[1] for r in rows) + 1
    table = QTable.create(n_states, n_actions)
    for s, a, v, c in rows:
        table.values[s, a] = v
        table.visit_counts[s, a] = c
    return table


def dump_training_trace_csv(rows: Sequence[tuple], path) -> None:
    """Write (iteration, slot, state, action, cost, epsilon) rows."""
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(["iteration", "slot", "state", "action", "cost", "epsilon"])
        for it, slot, state, action, cost, eps in rows:
            writer.writerow([it, slot, state, action, repr(cost), repr(eps)])
