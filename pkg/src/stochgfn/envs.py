"""Stochastic-DAG environments with a bipartite even/odd state structure.

Even states are ordinary environment states; an odd state is the (state,
action) pair after the agent commits to an action but before the
environment's stochasticity resolves. Policy edges go even -> odd, kernel
edges go odd -> even.

The shared noise model: with probability 1-alpha the chosen action's
intended outcome happens; with probability alpha a uniformly chosen
noise-eligible action is executed instead. Stop/end actions are exempt
from noise by default so termination stays deterministic.
"""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass, field
from typing import NamedTuple, Optional

import numpy as np

from .errors import NotEnumerableError, UsageError

KERNEL_TOL = 1e-9


class OddState(NamedTuple):
    even: object
    action: int


@dataclass(frozen=True)
class StepRecord:
    s: object
    a: int
    s_next: object
    terminal: bool
    reward: Optional[float] = None


@dataclass
class Trajectory:
    steps: list

    def __post_init__(self):
        if not self.steps:
            raise UsageError("empty trajectory")
        for prev, cur in zip(self.steps, self.steps[1:]):
            if prev.s_next != cur.s:
                raise UsageError("trajectory steps do not chain")
        for st in self.steps[:-1]:
            if st.terminal:
                raise UsageError("non-final step marked terminal")
        if not self.steps[-1].terminal:
            raise UsageError("final step not terminal")

    @property
    def terminal_state(self):
        return self.steps[-1].s_next

    @property
    def terminal_reward(self):
        return self.steps[-1].reward


class Env:
    """Base contract; immutable after construction, safe for concurrent reads."""

    alpha: float
    s0: object
    horizon: int
    n_action_slots: int
    n_parent_slots: int
    fingerprint: str
    n_modes: int

    def is_terminal(self, s) -> bool:
        raise NotImplementedError

    def actions(self, s) -> list:
        raise NotImplementedError

    def noise_actions(self, s) -> list:
        """Actions the slip noise may substitute for the chosen one."""
        raise NotImplementedError

    def intended_next(self, s, a):
        raise NotImplementedError

    def intended_action(self, s, s_next) -> int:
        raise NotImplementedError

    def reward(self, x) -> float:
        raise NotImplementedError

    def encode(self, s) -> np.ndarray:
        raise NotImplementedError

    encoding_dim: int

    def parent_slot(self, s_next, parent: OddState) -> int:
        raise NotImplementedError

    def mode_of(self, x) -> Optional[int]:
        raise NotImplementedError

    # -- shared machinery -------------------------------------------------

    def action_mask(self, s):
        mask = np.zeros(self.n_action_slots, dtype=bool)
        mask[self.actions(s)] = True
        return mask

    def _check_action(self, s, a):
        if self.is_terminal(s):
            raise UsageError(f"action query on terminal state {s!r}")
        if a not in self.actions(s):
            raise UsageError(f"invalid action {a} at state {s!r}")

    def kernel_support(self, s, a):
        """All (s_next, probability) outcomes of committing to action a at s."""
        self._check_action(s, a)
        noise = self.noise_actions(s)
        if self.alpha == 0.0 or a not in noise:
            return [(self.intended_next(s, a), 1.0)]
        m = len(noise)
        out = []
        for b in noise:
            p = self.alpha / m + (1.0 - self.alpha if b == a else 0.0)
            out.append((self.intended_next(s, b), p))
        return out

    def kernel_prob(self, s, a, s_next):
        for nxt, p in self.kernel_support(s, a):
            if nxt == s_next:
                return p
        return 0.0

    def step(self, s, a, rng) -> StepRecord:
        support = self.kernel_support(s, a)
        probs = np.array([p for _, p in support])
        idx = rng.choice(len(support), p=probs / probs.sum())
        s_next = support[idx][0]
        terminal = self.is_terminal(s_next)
        reward = self.reward(s_next) if terminal else None
        return StepRecord(s=s, a=a, s_next=s_next, terminal=terminal, reward=reward)

    def parents(self, s_next):
        """Odd states (s, a) with positive kernel probability of reaching s_next."""
        if s_next == self.s0:
            raise UsageError("initial state has no parents")
        out = []
        for pred, a_int in self._intended_edges_into(s_next):
            if self.alpha > 0.0 and a_int in self.noise_actions(pred):
                for b in self.actions(pred):
                    if b == a_int or b in self.noise_actions(pred):
                        out.append(OddState(pred, b))
            else:
                out.append(OddState(pred, a_int))
        # dedupe while preserving order
        seen, uniq = set(), []
        for o in out:
            if o not in seen:
                seen.add(o)
                uniq.append(o)
        return uniq

    def det_parents(self, s_next):
        """Parents under the deterministic view: intended edges only."""
        if s_next == self.s0:
            raise UsageError("initial state has no parents")
        return [OddState(pred, a) for pred, a in self._intended_edges_into(s_next)]

    def _intended_edges_into(self, s_next):
        """(predecessor, action) pairs whose intended outcome is s_next."""
        raise NotImplementedError

    def parents_info(self, s_next, det_view=False):
        """Memoized (parents, slots, slot-lookup, slot-mask) for a state."""
        key = (s_next, det_view)
        try:
            cache = self._parent_cache
        except AttributeError:
            cache = self._parent_cache = {}
        if key not in cache:
            plist = self.det_parents(s_next) if det_view else self.parents(s_next)
            slots = tuple(self.parent_slot(s_next, p) for p in plist)
            slot_of = {(p.even, p.action): sl for p, sl in zip(plist, slots)}
            mask = np.zeros(self.n_parent_slots, dtype=bool)
            mask[list(slots)] = True
            cache[key] = (tuple(plist), slots, slot_of, mask)
        return cache[key]

    def candidates(self, s):
        """Dynamics-model candidate set: intended outcomes of all valid actions,
        indexed by action slot."""
        return [(a, self.intended_next(s, a)) for a in self.actions(s)]

    def candidate_index(self, s, a, s_next):
        try:
            return self.intended_action(s, s_next)
        except UsageError:
            raise UsageError(
                f"observed transition ({s!r}, {a}, {s_next!r}) is outside "
                f"the candidate structure"
            )

    # -- enumeration -------------------------------------------------------

    enumerable = False

    def state_count(self) -> int:
        raise NotEnumerableError(f"{self.fingerprint}: not enumerable")

    def enumerate_states(self, cap=500_000):
        """Topologically ordered list of all even and odd states."""
        if not self.enumerable:
            raise NotEnumerableError(f"{self.fingerprint}: not enumerable")
        n = self.state_count()
        if n > cap:
            raise NotEnumerableError(
                f"{self.fingerprint}: {n} states exceeds enumeration cap {cap}"
            )
        out = []
        for s in self._even_states_topo():
            out.append(s)
            if not self.is_terminal(s):
                out.extend(OddState(s, a) for a in self.actions(s))
        return out

    def even_states_topo(self):
        if not self.enumerable:
            raise NotEnumerableError(f"{self.fingerprint}: not enumerable")
        return list(self._even_states_topo())

    def _even_states_topo(self):
        raise NotImplementedError

    def terminal_states(self):
        return [s for s in self._even_states_topo() if self.is_terminal(s)]

    # -- complete-object interface for the MCMC baseline --------------------

    def random_object(self, rng):
        raise NotImplementedError

    def propose_object(self, x, rng):
        """Resample one site uniformly (symmetric proposal)."""
        raise NotImplementedError

    def object_reward(self, x) -> float:
        raise NotImplementedError

    def object_terminal(self, x):
        """Map a complete object to its terminal even state."""
        raise NotImplementedError


class TwoArmToy(Env):
    """One-step counterexample: two actions whose outcomes cross over.

    From the root, action i lands on terminal i with probability 0.75 and on
    the other terminal with probability 0.25; rewards are (1, 2). The
    reward-proportional policy therefore terminates at (5/12, 7/12) while
    the ideal terminating distribution is (1/3, 2/3).
    """

    REWARDS = (1.0, 2.0)

    def __init__(self):
        self.alpha = 0.5  # 1 - 0.5 + 0.5/2 = 0.75 on the intended terminal
        self.s0 = 0
        self.horizon = 1
        self.n_action_slots = 2
        self.n_parent_slots = 2
        self.fingerprint = "figure1"
        self.n_modes = 1
        self.enumerable = True
        self.encoding_dim = 3

    def is_terminal(self, s):
        return s != 0

    def actions(self, s):
        if self.is_terminal(s):
            raise UsageError("action query on terminal state")
        return [0, 1]

    def noise_actions(self, s):
        return [0, 1]

    def intended_next(self, s, a):
        return a + 1

    def intended_action(self, s, s_next):
        if s != 0 or s_next not in (1, 2):
            raise UsageError(f"no intended edge {s!r} -> {s_next!r}")
        return s_next - 1

    def _intended_edges_into(self, s_next):
        return [(0, s_next - 1)]

    def parent_slot(self, s_next, parent):
        return parent.action

    def reward(self, x):
        if not self.is_terminal(x):
            raise UsageError("reward of non-terminal state")
        return self.REWARDS[x - 1]

    def encode(self, s):
        v = np.zeros(3)
        v[s] = 1.0
        return v

    def mode_of(self, x):
        return 0 if x == 2 else None

    def state_count(self):
        return 5

    def _even_states_topo(self):
        return [0, 1, 2]

    def random_object(self, rng):
        return int(rng.integers(1, 3))

    def propose_object(self, x, rng):
        return int(rng.integers(1, 3))

    def object_reward(self, x):
        return self.reward(x)

    def object_terminal(self, x):
        return x


class HyperGrid(Env):
    """Grid navigation with coordinate-increment actions, a stop action, and
    slip noise over the valid movement actions.

    States are (coords, done); reaching (coords, True) via stop is terminal.
    Reward has four high tiers near the corners (mode-peaked constant
    ordering by default).
    """

    def __init__(self, H=8, ndim=2, alpha=0.0, R0=0.001, R1=0.5, R2=2.0,
                 noisy_stop=False):
        if H < 2:
            raise UsageError("H must be >= 2")
        if not (0.0 <= alpha < 1.0):
            raise UsageError(f"alpha must be in [0,1), got {alpha}")
        if R0 <= 0 or R1 < 0 or R2 < 0:
            raise UsageError("reward constants must satisfy R0 > 0, R1,R2 >= 0")
        self.H, self.ndim, self.alpha = H, ndim, alpha
        self.R0, self.R1, self.R2 = R0, R1, R2
        self.noisy_stop = noisy_stop
        self.s0 = (tuple([0] * ndim), False)
        self.horizon = ndim * (H - 1) + 1
        self.n_action_slots = ndim + 1  # increments + stop
        self.stop_action = ndim
        # parent slot = (predecessor offset) * (ndim+1) + parent action;
        # offset ndim means "same cell" (the stop edge)
        self.n_parent_slots = (ndim + 1) * (ndim + 1)
        self.fingerprint = f"hypergrid_H{H}d{ndim}a{alpha:g}"
        self.n_modes = 2**ndim
        self.enumerable = True
        self.encoding_dim = ndim * H + 1
        self._mode_bands = self._compute_mode_bands()

    def _compute_mode_bands(self):
        lo = [x for x in range(self.H) if 0.3 < abs(x / self.H - 0.5) < 0.4 and x / self.H < 0.5]
        hi = [x for x in range(self.H) if 0.3 < abs(x / self.H - 0.5) < 0.4 and x / self.H > 0.5]
        return set(lo), set(hi)

    def is_terminal(self, s):
        return s[1]

    def actions(self, s):
        if s[1]:
            raise UsageError("action query on terminal state")
        coords = s[0]
        acts = [i for i in range(self.ndim) if coords[i] < self.H - 1]
        acts.append(self.stop_action)
        return acts

    def noise_actions(self, s):
        acts = [i for i in range(self.ndim) if s[0][i] < self.H - 1]
        if self.noisy_stop:
            acts.append(self.stop_action)
        return acts

    def intended_next(self, s, a):
        coords = s[0]
        if a == self.stop_action:
            return (coords, True)
        c = list(coords)
        c[a] += 1
        return (tuple(c), False)

    def intended_action(self, s, s_next):
        if s_next[1]:
            if s_next[0] == s[0]:
                return self.stop_action
            raise UsageError(f"no intended edge {s!r} -> {s_next!r}")
        diff = [i for i in range(self.ndim) if s_next[0][i] != s[0][i]]
        if len(diff) == 1 and s_next[0][diff[0]] == s[0][diff[0]] + 1:
            return diff[0]
        raise UsageError(f"no intended edge {s!r} -> {s_next!r}")

    def _intended_edges_into(self, s_next):
        if s_next[1]:
            return [((s_next[0], False), self.stop_action)]
        out = []
        for i in range(self.ndim):
            if s_next[0][i] > 0:
                c = list(s_next[0])
                c[i] -= 1
                out.append(((tuple(c), False), i))
        return out

    def parent_slot(self, s_next, parent):
        pred_coords = parent.even[0]
        if pred_coords == s_next[0]:
            offset = self.ndim
        else:
            offset = next(i for i in range(self.ndim)
                          if pred_coords[i] != s_next[0][i])
        return offset * (self.ndim + 1) + parent.action

    def reward(self, x):
        if not x[1]:
            raise UsageError("reward of non-terminal state")
        r = self.R0
        t1, t2 = 1.0, 1.0
        for c in x[0]:
            z = abs(c / self.H - 0.5)
            t1 *= 1.0 if z > 0.25 else 0.0
            t2 *= 1.0 if 0.3 < z < 0.4 else 0.0
        return r + self.R1 * t1 + self.R2 * t2

    def encode(self, s):
        v = np.zeros(self.encoding_dim)
        for i, c in enumerate(s[0]):
            v[i * self.H + c] = 1.0
        if s[1]:
            v[-1] = 1.0
        return v

    def mode_of(self, x):
        coords = x[0] if isinstance(x, tuple) and isinstance(x[0], tuple) else x
        lo, hi = self._mode_bands
        corner = 0
        for i, c in enumerate(coords):
            if c in hi:
                corner |= 1 << i
            elif c not in lo:
                return None
        return corner

    def state_count(self):
        n_even = 2 * self.H**self.ndim
        n_odd = sum(len(self.actions((c, False)))
                    for c in itertools.product(range(self.H), repeat=self.ndim))
        return n_even + n_odd

    def _even_states_topo(self):
        cells = sorted(itertools.product(range(self.H), repeat=self.ndim), key=sum)
        for c in cells:
            yield (c, False)
        for c in cells:
            yield (c, True)

    def random_object(self, rng):
        return tuple(int(v) for v in rng.integers(0, self.H, size=self.ndim))

    def propose_object(self, x, rng):
        i = int(rng.integers(self.ndim))
        c = list(x)
        c[i] = int(rng.integers(self.H))
        return tuple(c)

    def object_reward(self, x):
        return self.reward((x, True))

    def object_terminal(self, x):
        return (x, True)


def edit_distance(a, b):
    """Levenshtein distance between two sequences."""
    prev = list(range(len(b) + 1))
    for i, ca in enumerate(a, 1):
        cur = [i]
        for j, cb in enumerate(b, 1):
            cur.append(min(prev[j] + 1, cur[j - 1] + 1, prev[j - 1] + (ca != cb)))
        prev = cur
    return prev[-1]


def _batch_edit_distances(seqs, target):
    """Levenshtein distances from each row of `seqs` [N, n] to `target` [n]."""
    n1 = seqs.shape[1]
    n2 = len(target)
    N = seqs.shape[0]
    prev = np.broadcast_to(np.arange(n2 + 1, dtype=np.int32), (N, n2 + 1)).copy()
    for i in range(1, n1 + 1):
        cur = np.empty_like(prev)
        cur[:, 0] = i
        ci = seqs[:, i - 1]
        for j in range(1, n2 + 1):
            sub = prev[:, j - 1] + (ci != target[j - 1])
            cur[:, j] = np.minimum(np.minimum(prev[:, j] + 1, cur[:, j - 1] + 1), sub)
        prev = cur
    return prev[:, -1]


class BitSeq(Env):
    """Left-to-right generation of an n-bit sequence in k-bit words, with
    token slip noise. Reward is exp(-min edit distance to the mode set),
    measured on the bit strings.
    """

    def __init__(self, n=16, k=4, alpha=0.0, mode_set=None, n_modes=4, seed=2023):
        if n % k != 0:
            raise UsageError(f"n={n} must be divisible by k={k}")
        if not (0.0 <= alpha < 1.0):
            raise UsageError(f"alpha must be in [0,1), got {alpha}")
        self.n, self.k, self.alpha = n, k, alpha
        self.V = 2**k
        self.L = n // k  # words per complete sequence
        self.s0 = ()
        self.horizon = self.L
        self.n_action_slots = self.V
        self.n_parent_slots = self.V
        self.fingerprint = f"bitseq_n{n}k{k}a{alpha:g}"
        self.enumerable = True
        self.encoding_dim = self.L * self.V
        if mode_set is None:
            rng = np.random.default_rng(seed)
            mode_set = [tuple(int(w) for w in rng.integers(0, self.V, size=self.L))
                        for _ in range(n_modes)]
        self.mode_set = [tuple(m) for m in mode_set]
        self.n_modes = len(self.mode_set)
        self._mode_bits = [self._bits(m) for m in self.mode_set]
        self._mode_index = {m: i for i, m in enumerate(self.mode_set)}

    def _bits(self, words):
        out = []
        for w in words:
            out.extend((w >> (self.k - 1 - b)) & 1 for b in range(self.k))
        return np.array(out, dtype=np.int8)

    def is_terminal(self, s):
        return len(s) == self.L

    def actions(self, s):
        if self.is_terminal(s):
            raise UsageError("action query on terminal state")
        return list(range(self.V))

    def noise_actions(self, s):
        return list(range(self.V))

    def intended_next(self, s, a):
        return s + (a,)

    def intended_action(self, s, s_next):
        if s_next[:-1] != s or len(s_next) != len(s) + 1:
            raise UsageError(f"no intended edge {s!r} -> {s_next!r}")
        return s_next[-1]

    def _intended_edges_into(self, s_next):
        return [(s_next[:-1], s_next[-1])]

    def parent_slot(self, s_next, parent):
        return parent.action

    def reward(self, x):
        if not self.is_terminal(x):
            raise UsageError("reward of non-terminal state")
        bits = self._bits(x)
        d = min(edit_distance(bits.tolist(), mb.tolist()) for mb in self._mode_bits)
        return math.exp(-d)

    def all_terminal_rewards(self):
        """Rewards for every complete sequence, ordered like terminal_states()."""
        terms = np.array(list(itertools.product(range(self.V), repeat=self.L)),
                         dtype=np.int64)
        bits = np.zeros((len(terms), self.n), dtype=np.int8)
        for w in range(self.L):
            for b in range(self.k):
                bits[:, w * self.k + b] = (terms[:, w] >> (self.k - 1 - b)) & 1
        dists = np.stack([_batch_edit_distances(bits, mb) for mb in self._mode_bits])
        return np.exp(-dists.min(axis=0).astype(np.float64))

    def encode(self, s):
        v = np.zeros(self.encoding_dim)
        for i, w in enumerate(s):
            v[i * self.V + w] = 1.0
        return v

    def mode_of(self, x, delta=0):
        if delta == 0:
            return self._mode_index.get(tuple(x))
        bits = self._bits(x)
        for i, mb in enumerate(self._mode_bits):
            if edit_distance(bits.tolist(), mb.tolist()) <= delta:
                return i
        return None

    def state_count(self):
        n_even = sum(self.V**t for t in range(self.L + 1))
        n_odd = sum(self.V**t for t in range(self.L)) * self.V
        return n_even + n_odd

    def _even_states_topo(self):
        for t in range(self.L + 1):
            for s in itertools.product(range(self.V), repeat=t):
                yield s

    def terminal_states(self):
        return list(itertools.product(range(self.V), repeat=self.L))

    def random_object(self, rng):
        return tuple(int(w) for w in rng.integers(0, self.V, size=self.L))

    def propose_object(self, x, rng):
        i = int(rng.integers(self.L))
        s = list(x)
        s[i] = int(rng.integers(self.V))
        return tuple(s)

    def object_reward(self, x):
        return self.reward(tuple(x))

    def object_terminal(self, x):
        return tuple(x)


class ExternalRewardSeq(Env):
    """Sequence environment whose terminal rewards come from a plain-text
    table: one `<object-encoding> <reward>` pair per line. Objects must be
    equal-length strings; the vocabulary is inferred from their characters.
    """

    def __init__(self, path, alpha=0.0, mode_threshold=None):
        if not (0.0 <= alpha < 1.0):
            raise UsageError(f"alpha must be in [0,1), got {alpha}")
        self.alpha = alpha
        rewards = {}
        with open(path) as fh:
            for lineno, line in enumerate(fh, 1):
                line = line.strip()
                if not line or line.startswith("#"):
                    continue
                parts = line.split()
                if len(parts) != 2:
                    raise UsageError(f"{path}:{lineno}: expected '<object> <reward>'")
                obj, rew = parts
                r = float(rew)
                if r <= 0:
                    raise UsageError(f"{path}:{lineno}: reward must be positive")
                rewards[obj] = r
        if not rewards:
            raise UsageError(f"{path}: empty reward table")
        lengths = {len(o) for o in rewards}
        if len(lengths) != 1:
            raise UsageError(f"{path}: objects must share one length, got {lengths}")
        self.L = lengths.pop()
        self.vocab = sorted({c for o in rewards for c in o})
        self.V = len(self.vocab)
        self._char_idx = {c: i for i, c in enumerate(self.vocab)}
        self._rewards = {self._to_state(o): r for o, r in rewards.items()}
        self.s0 = ()
        self.horizon = self.L
        self.n_action_slots = self.V
        self.n_parent_slots = self.V
        self.fingerprint = f"external_L{self.L}V{self.V}a{alpha:g}"
        self.enumerable = len(self._rewards) == self.V**self.L
        self.encoding_dim = self.L * self.V
        if mode_threshold is None:
            mode_threshold = max(self._rewards.values())
        self.mode_threshold = mode_threshold
        self._modes = {s: i for i, (s, r) in enumerate(sorted(self._rewards.items()))
                       if r >= mode_threshold}
        self.n_modes = len(self._modes)

    def _to_state(self, obj):
        return tuple(self._char_idx[c] for c in obj)

    def decode(self, s):
        return "".join(self.vocab[w] for w in s)

    def is_terminal(self, s):
        return len(s) == self.L

    def actions(self, s):
        if self.is_terminal(s):
            raise UsageError("action query on terminal state")
        return list(range(self.V))

    def noise_actions(self, s):
        return list(range(self.V))

    def intended_next(self, s, a):
        return s + (a,)

    def intended_action(self, s, s_next):
        if s_next[:-1] != s or len(s_next) != len(s) + 1:
            raise UsageError(f"no intended edge {s!r} -> {s_next!r}")
        return s_next[-1]

    def _intended_edges_into(self, s_next):
        return [(s_next[:-1], s_next[-1])]

    def parent_slot(self, s_next, parent):
        return parent.action

    def reward(self, x):
        if not self.is_terminal(x):
            raise UsageError("reward of non-terminal state")
        try:
            return self._rewards[tuple(x)]
        except KeyError:
            raise UsageError(f"object {self.decode(x)!r} missing from reward table")

    def encode(self, s):
        v = np.zeros(self.encoding_dim)
        for i, w in enumerate(s):
            v[i * self.V + w] = 1.0
        return v

    def mode_of(self, x):
        return self._modes.get(tuple(x))

    def state_count(self):
        n_even = sum(self.V**t for t in range(self.L + 1))
        n_odd = sum(self.V**t for t in range(self.L)) * self.V
        return n_even + n_odd

    def _even_states_topo(self):
        for t in range(self.L + 1):
            for s in itertools.product(range(self.V), repeat=t):
                yield s

    def random_object(self, rng):
        return tuple(int(w) for w in rng.integers(0, self.V, size=self.L))

    def propose_object(self, x, rng):
        i = int(rng.integers(self.L))
        s = list(x)
        s[i] = int(rng.integers(self.V))
        return tuple(s)

    def object_reward(self, x):
        return self.reward(tuple(x))

    def object_terminal(self, x):
        return tuple(x)


@dataclass
class EnvSpec:
    """Declarative environment selection, as parsed from experiment config."""

    kind: str = "hypergrid"
    H: int = 8
    ndim: int = 2
    n: int = 16
    k: int = 4
    alpha: float = 0.0
    R0: float = 0.001
    R1: float = 0.5
    R2: float = 2.0
    noisy_stop: bool = False
    mode_set: Optional[list] = None
    n_modes: int = 4
    mode_seed: int = 2023
    reward_table: Optional[str] = None
    mode_threshold: Optional[float] = None

    def build(self) -> Env:
        if self.kind == "figure1":
            return TwoArmToy()
        if self.kind == "hypergrid":
            return HyperGrid(H=self.H, ndim=self.ndim, alpha=self.alpha,
                             R0=self.R0, R1=self.R1, R2=self.R2,
                             noisy_stop=self.noisy_stop)
        if self.kind == "bitseq":
            return BitSeq(n=self.n, k=self.k, alpha=self.alpha,
                          mode_set=self.mode_set, n_modes=self.n_modes,
                          seed=self.mode_seed)
        if self.kind == "external":
            if not self.reward_table:
                raise UsageError("external env requires reward_table path")
            return ExternalRewardSeq(self.reward_table, alpha=self.alpha,
                                     mode_threshold=self.mode_threshold)
        raise UsageError(f"unknown env kind {self.kind!r}")
