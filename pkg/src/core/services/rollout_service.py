"""
롤아웃 수집과 A3C 손실

워커는 고정된 파라미터 스냅샷으로 최대 horizon 스텝을 진행해 RolloutSegment 를 만들고,
n-step 리턴으로 정책/가치/엔트로피 손실을 계산합니다.
LSTM 은닉 상태와 에피소드 상태는 한 에피소드 안에서 세그먼트를 넘어 이어집니다.
"""
from __future__ import annotations

from dataclasses import dataclass, field, replace
from typing import Callable, Optional, Sequence

import numpy as np

from core.domain.models import NUM_ACTIONS, Action, Detection, EpisodeState
from core.grad import tensor as T
from core.grad.layers import Mode, log_softmax, softmax
from core.grad.params import ParamSet
from core.grad.tensor import Tensor
from core.model.tdanet import HiddenState, TdaNet
from core.services.navigation_env_service import NavigationEnvironment

ObservationHook = Callable[[Sequence[Detection]], None]


@dataclass(frozen=True)
class RolloutStep:
    """세그먼트의 한 스텝. log_prob/entropy/value 는 스냅샷 파라미터에 연결된 그래프 노드입니다."""
    detections: tuple[Detection, ...]
    action: int
    log_prob: Tensor
    entropy: Tensor
    value: Tensor
    reward: float
    done: bool


@dataclass
class RolloutSegment:
    """최대 horizon 길이의 궤적 조각.

    Attributes:
        steps (list[RolloutStep]): 스텝 기록.
        bootstrap (float): 잘린 세그먼트의 V(s_{t+n}). 에피소드가 끝났으면 0.
    """
    steps: list[RolloutStep] = field(default_factory=list)
    bootstrap: float = 0.0

    def __len__(self) -> int:
        return len(self.steps)

    @property
    def rewards(self) -> list[float]:
        return [s.reward for s in self.steps]

    @property
    def terminated(self) -> bool:
        return bool(self.steps) and self.steps[-1].done


@dataclass
class WorkerEpisode:
    """세그먼트 사이에 이어지는 워커의 에피소드 상태."""
    state: EpisodeState
    hidden: HiddenState
    max_steps: int
    total_reward: float = 0.0

    @property
    def finished(self) -> bool:
        return self.state.done or self.state.step_count >= self.max_steps


@dataclass(frozen=True)
class LossParts:
    """손실 구성 요소 (로그용 float)."""
    total: float
    policy: float
    value: float
    entropy: float


def policy_entropy(logits: Tensor) -> Tensor:
    """−Σ π log π (1×1)."""
    return T.scale(T.sum_all(T.mul(softmax(logits), log_softmax(logits))), -1.0)


def collect_rollout(
    env: NavigationEnvironment,
    model: TdaNet,
    params: ParamSet,
    episode: WorkerEpisode,
    horizon: int,
    rng: np.random.Generator,
    mode: Mode = Mode.TRAIN,
    on_observation: Optional[ObservationHook] = None,
) -> tuple[RolloutSegment, WorkerEpisode]:
    """스냅샷 파라미터로 최대 horizon 스텝을 진행합니다.

    행동은 softmax(logits) 에서 샘플링합니다. 에피소드가 끝나면(Done 또는 max_steps) bootstrap 은 0,
    horizon 에서 잘리면 다음 관측의 V 값(그래디언트 없음)입니다.

    Args:
        env (NavigationEnvironment): 환경.
        model (TdaNet): 모델.
        params (ParamSet): 수집 동안 변하지 않는 파라미터 스냅샷.
        episode (WorkerEpisode): 이어서 진행할 에피소드 (끝난 상태면 안 됨).
        horizon (int): 최대 스텝 수 (1 이상).
        rng (np.random.Generator): 행동 샘플링/dropout/관측 노이즈 난수.
        mode (Mode): 기본 TRAIN (dropout 활성).
        on_observation (Optional[ObservationHook]): 정책에 들어가는 관측을 검사하는 훅.

    Returns:
        tuple[RolloutSegment, WorkerEpisode]: (세그먼트, 은닉 상태가 분리된 다음 에피소드 상태)
    """
    if horizon < 1:
        raise ValueError(f"horizon 은 1 이상이어야 합니다: {horizon}")
    if episode.finished:
        raise ValueError("이미 끝난 에피소드로는 롤아웃을 수집할 수 없습니다")

    segment = RolloutSegment()
    state, hidden, total = episode.state, episode.hidden, episode.total_reward
    target = state.target
    while len(segment) < horizon:
        detections = env.observe(state, rng)
        if on_observation is not None:
            on_observation(detections)
        output, hidden, _ = model.forward(params, detections, target, hidden, mode, rng)

        probs = softmax(output.logits).numpy()[0]
        action = int(rng.choice(NUM_ACTIONS, p=probs / probs.sum()))
        log_prob = T.pick(log_softmax(output.logits), action)

        reward, state = env.step(state, Action(action))
        total += reward
        done = state.done or state.step_count >= episode.max_steps
        segment.steps.append(RolloutStep(
            detections=tuple(detections),
            action=action,
            log_prob=log_prob,
            entropy=policy_entropy(output.logits),
            value=output.value,
            reward=reward,
            done=done,
        ))
        if done:
            break

    hidden = hidden.detach()
    if not segment.terminated:
        detections = env.observe(state)
        output, _, _ = model.forward(params, detections, target, hidden, Mode.EVAL)
        segment.bootstrap = output.value.item()

    return segment, replace(episode, state=state, hidden=hidden, total_reward=total)


def n_step_returns(rewards: Sequence[float], bootstrap: float, gamma: float) -> list[float]:
    """R_t = Σ_k γ^k r_{t+k} + γ^{n−t}·bootstrap."""
    returns = []
    running = bootstrap
    for reward in reversed(rewards):
        running = reward + gamma * running
        returns.append(running)
    returns.reverse()
    return returns


def a3c_loss(
    segment: RolloutSegment,
    gamma: float,
    entropy_weight: float,
    value_weight: float,
    advantages: Optional[Sequence[float]] = None,
) -> tuple[Tensor, LossParts]:
    """A3C 손실.

    loss = Σ_t [ −log π(a_t|s_t)·A_t + value_weight·(R_t − V_t)² − β·H(π_t) ],  A_t = R_t − V_t (상수 취급)

    Args:
        advantages (Optional[Sequence[float]]): 고정할 A_t 값. None 이면 세그먼트의 V_t 로 계산합니다.

    Returns:
        tuple[Tensor, LossParts]: (1×1 손실 노드, 구성 요소)
    """
    if len(segment) == 0:
        raise ValueError("빈 세그먼트로는 손실을 계산할 수 없습니다")

    returns = n_step_returns(segment.rewards, segment.bootstrap, gamma)
    if advantages is None:
        advantages = [ret - step.value.item() for step, ret in zip(segment.steps, returns)]
    elif len(advantages) != len(segment):
        raise ValueError(f"advantages 길이({len(advantages)})가 세그먼트 길이({len(segment)})와 다릅니다")

    policy_terms, value_terms, entropy_terms = [], [], []
    for step, ret, advantage in zip(segment.steps, returns, advantages):
        policy_terms.append(T.scale(step.log_prob, -advantage))
        value_terms.append(T.square(T.sub(Tensor([[ret]]), step.value)))
        entropy_terms.append(step.entropy)

    def _sum(terms: list[Tensor]) -> Tensor:
        acc = terms[0]
        for term in terms[1:]:
            acc = T.add(acc, term)
        return acc

    policy_loss = _sum(policy_terms)
    value_loss = _sum(value_terms)
    entropy = _sum(entropy_terms)
    loss = T.add(
        T.add(policy_loss, T.scale(value_loss, value_weight)),
        T.scale(entropy, -entropy_weight),
    )
    parts = LossParts(
        total=loss.item(),
        policy=policy_loss.item(),
        value=value_loss.item(),
        entropy=entropy.item(),
    )
    return loss, parts
