"""Actor-critic learner with hand-rolled networks.

Both networks are small fully connected ReLU stacks trained with Adam;
forward and backward passes are written out explicitly so the gradients
are auditable and checkable against finite differences. The actor maps
the 21-entry state to a softmax over the nine reallocation actions; the
critic scores a state concatenated with a one-hot action.
"""

from __future__ import annotations

import math
from collections import deque
from dataclasses import dataclass
from typing import Iterable, Sequence

import numpy as np

from .domain import N_ACTIONS, STATE_DIM

ACTOR_LAYERS = (STATE_DIM, 128, 64, N_ACTIONS)
CRITIC_LAYERS = (STATE_DIM + N_ACTIONS, 128, 64, 1)
ACTOR_LR = 3e-4
CRITIC_LR = 1e-3
REPLAY_CAPACITY = 100_000
BATCH_SIZE = 32
EPSILON_DECAY = 0.995
EPSILON_FLOOR = 0.01


def softmax(logits: np.ndarray) -> np.ndarray:
    """Row-wise stable softmax."""
    shifted = logits - logits.max(axis=-1, keepdims=True)
    exps = np.exp(shifted)
    return exps / exps.sum(axis=-1, keepdims=True)


def one_hot(indices: np.ndarray | Sequence[int], width: int = N_ACTIONS) -> np.ndarray:
    idx = np.asarray(indices, dtype=np.intp).reshape(-1)
    if idx.size and (idx.min() < 0 or idx.max() >= width):
        raise ValueError(f"index out of range for one-hot of width {width}")
    out = np.zeros((idx.size, width), dtype=np.float64)
    out[np.arange(idx.size), idx] = 1.0
    return out


class MLP:
    """Fully connected ReLU network with explicit forward/backward passes.

    Weights use fan-in uniform initialization. Parameters serialize to a
    flat float64 vector, layer by layer, each layer as the row-major
    weight matrix followed by its bias.
    """

    def __init__(self, layer_sizes: Sequence[int], rng: np.random.Generator) -> None:
        if len(layer_sizes) < 2:
            raise ValueError("need at least an input and an output layer")
        self.layer_sizes = tuple(int(s) for s in layer_sizes)
        self.weights: list[np.ndarray] = []
        self.biases: list[np.ndarray] = []
        for fan_in, fan_out in zip(self.layer_sizes[:-1], self.layer_sizes[1:]):
            limit = math.sqrt(6.0 / fan_in)
            self.weights.append(rng.uniform(-limit, limit, size=(fan_in, fan_out)))
            self.biases.append(np.zeros(fan_out))

    @property
    def n_layers(self) -> int:
        return len(self.weights)

    @property
    def n_params(self) -> int:
        return sum(w.size + b.size for w, b in zip(self.weights, self.biases))

    def forward(self, x: np.ndarray) -> tuple[np.ndarray, list[np.ndarray]]:
        """Return (output, cache); hidden layers are ReLU, the last is linear."""
        h = np.atleast_2d(np.asarray(x, dtype=np.float64))
        if h.shape[1] != self.layer_sizes[0]:
            raise ValueError(f"expected input width {self.layer_sizes[0]}, got {h.shape[1]}")
        activations = [h]
        for i, (w, b) in enumerate(zip(self.weights, self.biases)):
            z = h @ w + b
            h = z if i == self.n_layers - 1 else np.maximum(z, 0.0)
            activations.append(h)
        return h, activations

    def backward(self, activations: list[np.ndarray], grad_out: np.ndarray) -> list[tuple[np.ndarray, np.ndarray]]:
        """Backpropagate d(loss)/d(output) through the cached forward pass.

        Returns per-layer (dW, db). The ReLU mask is recovered from the
        cached post-activation values (positive iff the unit fired).
        """
        grads: list[tuple[np.ndarray, np.ndarray]] = [None] * self.n_layers  # type: ignore[list-item]
        g = np.asarray(grad_out, dtype=np.float64)
        for i in reversed(range(self.n_layers)):
            grads[i] = (activations[i].T @ g, g.sum(axis=0))
            if i > 0:
                g = (g @ self.weights[i].T) * (activations[i] > 0.0)
        return grads

    def get_flat(self) -> np.ndarray:
        parts: list[np.ndarray] = []
        for w, b in zip(self.weights, self.biases):
            parts.append(w.ravel(order="C"))
            parts.append(b.ravel(order="C"))
        return np.concatenate(parts)

    def set_flat(self, flat: np.ndarray) -> None:
        flat = np.asarray(flat, dtype=np.float64).reshape(-1)
        if flat.size != self.n_params:
            raise ValueError(f"expected {self.n_params} parameters, got {flat.size}")
        offset = 0
        for i, (w, b) in enumerate(zip(self.weights, self.biases)):
            self.weights[i] = flat[offset:offset + w.size].reshape(w.shape).copy()
            offset += w.size
            self.biases[i] = flat[offset:offset + b.size].copy()
            offset += b.size


class Adam:
    """Standard Adam with bias correction; a zero gradient leaves parameters fixed."""

    def __init__(self, lr: float, beta1: float = 0.9, beta2: float = 0.999, eps: float = 1e-8) -> None:
        self.lr = lr
        self.beta1 = beta1
        self.beta2 = beta2
        self.eps = eps
        self.t = 0
        self._m: list[np.ndarray] | None = None
        self._v: list[np.ndarray] | None = None

    def step(self, params: list[np.ndarray], grads: list[np.ndarray]) -> None:
        if self._m is None:
            self._m = [np.zeros_like(p) for p in params]
            self._v = [np.zeros_like(p) for p in params]
        self.t += 1
        correct1 = 1.0 - self.beta1 ** self.t
        correct2 = 1.0 - self.beta2 ** self.t
        for p, g, m, v in zip(params, grads, self._m, self._v):
            m *= self.beta1
            m += (1.0 - self.beta1) * g
            v *= self.beta2
            v += (1.0 - self.beta2) * g * g
            p -= self.lr * (m / correct1) / (np.sqrt(v / correct2) + self.eps)


@dataclass(frozen=True)
class Transition:
    """One stored decision: state, action, reward, successor, terminal flag."""

    state: np.ndarray
    action: int
    reward: float
    next_state: np.ndarray
    terminal: bool

    def __post_init__(self) -> None:
        for name in ("state", "next_state"):
            vec = getattr(self, name)
            if vec.shape != (STATE_DIM,) or not np.all(np.isfinite(vec)):
                raise ValueError(f"{name} must be a finite vector of length {STATE_DIM}")
        if not 0 <= self.action < N_ACTIONS:
            raise ValueError(f"action out of range: {self.action}")
        if not math.isfinite(self.reward):
            raise ValueError(f"reward must be finite, got {self.reward}")


class ReplayBuffer:
    """Fixed-capacity FIFO transition store with uniform sampling."""

    def __init__(self, capacity: int = REPLAY_CAPACITY) -> None:
        if capacity < 1:
            raise ValueError(f"capacity must be >= 1, got {capacity}")
        self.capacity = capacity
        self._items: deque[Transition] = deque(maxlen=capacity)

    def add(self, transition: Transition) -> None:
        self._items.append(transition)

    def sample(self, batch_size: int, rng: np.random.Generator) -> list[Transition]:
        if batch_size > len(self._items):
            raise ValueError(f"cannot sample {batch_size} from buffer of {len(self._items)}")
        picks = rng.choice(len(self._items), size=batch_size, replace=False)
        return [self._items[i] for i in picks]

    def __len__(self) -> int:
        return len(self._items)


class ActorCriticAgent:
    """Policy and value networks plus the replay-driven update rule."""

    def __init__(
        self,
        seed: int = 0,
        actor_lr: float = ACTOR_LR,
        critic_lr: float = CRITIC_LR,
        buffer_capacity: int = REPLAY_CAPACITY,
        batch_size: int = BATCH_SIZE,
        epsilon: float = 0.3,
        epsilon_decay: float = EPSILON_DECAY,
        epsilon_floor: float = EPSILON_FLOOR,
        entropy_coef: float = 0.0,
    ) -> None:
        self.rng = np.random.default_rng(seed)
        self.actor = MLP(ACTOR_LAYERS, self.rng)
        self.critic = MLP(CRITIC_LAYERS, self.rng)
        self.actor_opt = Adam(actor_lr)
        self.critic_opt = Adam(critic_lr)
        self.buffer = ReplayBuffer(buffer_capacity)
        self.batch_size = batch_size
        self.epsilon = epsilon
        self.epsilon_decay = epsilon_decay
        self.epsilon_floor = epsilon_floor
        self.entropy_coef = entropy_coef
        self.pretrain_mse_history: list[float] = []

    # ---------------- forward passes ----------------

    def actor_forward(self, state: np.ndarray) -> np.ndarray:
        """Action probabilities for one state (1d) or a batch (2d)."""
        logits, _ = self.actor.forward(state)
        probs = softmax(logits)
        return probs[0] if np.asarray(state).ndim == 1 else probs

    def critic_forward(self, state: np.ndarray, action_one_hot: np.ndarray) -> float:
        """Q value of (state, action); the action must be exactly one-hot."""
        a = np.asarray(action_one_hot, dtype=np.float64).reshape(-1)
        if a.shape != (N_ACTIONS,):
            raise ValueError(f"action encoding must have {N_ACTIONS} entries")
        if not (np.all((a == 0.0) | (a == 1.0)) and a.sum() == 1.0):
            raise ValueError("action encoding must be one-hot")
        x = np.concatenate([np.asarray(state, dtype=np.float64).reshape(-1), a])
        q, _ = self.critic.forward(x)
        return float(q[0, 0])

    def _q_all_actions(self, states: np.ndarray) -> np.ndarray:
        """Q values for every action at each state; shape (batch, n_actions)."""
        n = states.shape[0]
        tiled = np.repeat(states, N_ACTIONS, axis=0)
        actions = np.tile(np.eye(N_ACTIONS), (n, 1))
        q, _ = self.critic.forward(np.hstack([tiled, actions]))
        return q.reshape(n, N_ACTIONS)

    # ---------------- acting ----------------

    def select_action(self, state: np.ndarray, epsilon: float | None = None,
                      rng: np.random.Generator | None = None) -> int:
        """Epsilon-greedy draw: uniform with probability epsilon, else sample the policy."""
        eps = self.epsilon if epsilon is None else epsilon
        r = rng if rng is not None else self.rng
        if r.random() < eps:
            return int(r.integers(N_ACTIONS))
        probs = self.actor_forward(np.asarray(state, dtype=np.float64).reshape(-1))
        return int(r.choice(N_ACTIONS, p=probs))

    def decay_epsilon(self) -> None:
        self.epsilon = max(self.epsilon_floor, self.epsilon * self.epsilon_decay)

    # ---------------- learning ----------------

    def critic_loss_grads(self, inputs: np.ndarray, targets: np.ndarray) -> tuple[float, list[np.ndarray]]:
        """Mean squared error of Q(inputs) against targets, with parameter grads."""
        q, cache = self.critic.forward(inputs)
        q = q[:, 0]
        diff = q - targets
        loss = float(np.mean(diff * diff))
        grad_out = (2.0 * diff / diff.size)[:, None]
        grads = self.critic.backward(cache, grad_out)
        return loss, [g for pair in grads for g in pair]

    def actor_loss_grads(self, states: np.ndarray, actions: np.ndarray,
                         advantages: np.ndarray) -> tuple[float, list[np.ndarray]]:
        """Advantage-weighted policy-gradient loss with optional entropy bonus."""
        logits, cache = self.actor.forward(states)
        probs = softmax(logits)
        n = states.shape[0]
        chosen = one_hot(actions)
        log_probs = np.log(np.clip(probs, 1e-12, None))
        loss = float(-np.mean(log_probs[np.arange(n), actions] * advantages))
        grad_logits = (probs - chosen) * advantages[:, None] / n
        if self.entropy_coef > 0.0:
            entropy = -(probs * log_probs).sum(axis=1)
            loss -= self.entropy_coef * float(np.mean(entropy))
            # d(-entropy)/dlogits = probs * (log_probs + entropy)
            grad_logits += self.entropy_coef * probs * (log_probs + entropy[:, None]) / n
        grads = self.actor.backward(cache, grad_logits)
        return loss, [g for pair in grads for g in pair]

    @staticmethod
    def _params(net: MLP) -> list[np.ndarray]:
        return [p for pair in zip(net.weights, net.biases) for p in pair]

    def update(self, batch: Iterable[Transition], gamma: float) -> tuple[float, float]:
        """One Adam step for each network from a transition batch.

        The critic regresses toward the expected one-step bootstrap under
        the current policy; the actor ascends the advantage of the taken
        action. Returns (actor_loss, critic_loss) before the step.
        """
        items = list(batch)
        if not items:
            raise ValueError("update needs a non-empty batch")
        states = np.stack([t.state for t in items])
        actions = np.array([t.action for t in items], dtype=np.intp)
        rewards = np.array([t.reward for t in items])
        next_states = np.stack([t.next_state for t in items])
        terminal = np.array([t.terminal for t in items], dtype=np.float64)

        # Bootstrapped target: expected Q over the policy at the successor state.
        next_probs = softmax(self.actor.forward(next_states)[0])
        v_next = (next_probs * self._q_all_actions(next_states)).sum(axis=1)
        targets = rewards + gamma * v_next * (1.0 - terminal)

        critic_inputs = np.hstack([states, one_hot(actions)])
        critic_loss, critic_grads = self.critic_loss_grads(critic_inputs, targets)

        q_all = self._q_all_actions(states)
        probs = softmax(self.actor.forward(states)[0])
        advantages = q_all[np.arange(len(items)), actions] - (probs * q_all).sum(axis=1)
        actor_loss, actor_grads = self.actor_loss_grads(states, actions, advantages)

        self.critic_opt.step(self._params(self.critic), critic_grads)
        self.actor_opt.step(self._params(self.actor), actor_grads)
        return actor_loss, critic_loss

    def pretrain_critic(self, dataset: Sequence[tuple[np.ndarray, int, float]],
                        epochs: int = 50, batch_size: int = 64) -> float:
        """Fit the critic to (state, action, return) rows from past runs.

        Runs minibatch Adam for the given number of epochs and returns the
        final full-dataset MSE; the per-epoch history is kept on
        ``pretrain_mse_history`` for inspection.
        """
        if not dataset:
            raise ValueError("pretraining needs a non-empty dataset")
        states = np.stack([np.asarray(s, dtype=np.float64) for s, _, _ in dataset])
        actions = np.array([a for _, a, _ in dataset], dtype=np.intp)
        returns = np.array([r for _, _, r in dataset], dtype=np.float64)
        inputs = np.hstack([states, one_hot(actions)])

        self.pretrain_mse_history = []
        n = inputs.shape[0]
        params = self._params(self.critic)
        for _ in range(epochs):
            order = self.rng.permutation(n)
            for start in range(0, n, batch_size):
                picks = order[start:start + batch_size]
                _, grads = self.critic_loss_grads(inputs[picks], returns[picks])
                self.critic_opt.step(params, grads)
            q, _ = self.critic.forward(inputs)
            self.pretrain_mse_history.append(float(np.mean((q[:, 0] - returns) ** 2)))
        return self.pretrain_mse_history[-1]

    # ---------------- persistence ----------------

    def save_checkpoint(self, path) -> None:
        """Write all parameters as flat little-endian float64: actor then critic,
        each layer as its row-major weight matrix followed by the bias."""
        np.concatenate([self.actor.get_flat(), self.critic.get_flat()]).astype("<f8").tofile(path)

    def load_checkpoint(self, path) -> None:
        flat = np.fromfile(path, dtype="<f8")
        expected = self.actor.n_params + self.critic.n_params
        if flat.size != expected:
            raise ValueError(f"checkpoint holds {flat.size} values, expected {expected}")
        self.actor.set_flat(flat[: self.actor.n_params])
        self.critic.set_flat(flat[self.actor.n_params:])
