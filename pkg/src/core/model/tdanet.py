"""
타겟 지향 어텐션 내비게이션 네트워크

검출 행렬 M_d 와 목표 벡터 V_t 로부터 행동 logits(6) 과 상태 가치를 계산합니다.

    M_d, V_t ─▶ 타겟 어텐션(TA) ─▶ V_L1 ─┐
                                        ├▶ 샴 차이(SA) ─▶ FFN(ReLU) ─▶ LSTM ─▶ actor / critic
    V_t ─▶ Linear1 ─────────────────────┘

ablation 변형:
    no_ta        TA 대신 M_L1 행 평균 사용 (어텐션 기록 없음)
    no_sa        |b(u) − b(v)| 대신 [b(u), b(v)] 연결 후 d_sa 로 선형 사상
    no_ta_no_sa  둘 다
"""
from __future__ import annotations

from dataclasses import dataclass
from typing import Optional, Sequence

import numpy as np

from core.config import ModelConfig
from core.domain.models import AttentionTrace, Detection, EmbeddingTable, NUM_ACTIONS
from core.grad import tensor as T
from core.grad.layers import LstmWeights, Mode, dropout, linear, lstm_step, softmax
from core.grad.params import ParamSet
from core.grad.tensor import Tensor
from core.model.inputs import build_detected_matrix, build_target_vector, feature_width

VARIANTS = ("full", "no_ta", "no_sa", "no_ta_no_sa")
ACTOR_INIT_SCALE = 0.01


def uses_target_attention(variant: str) -> bool:
    return variant in ("full", "no_sa")


def uses_siamese(variant: str) -> bool:
    return variant in ("full", "no_ta")


@dataclass(frozen=True)
class HiddenState:
    h: Tensor
    c: Tensor

    @classmethod
    def zeros(cls, hidden: int) -> "HiddenState":
        return cls(Tensor(np.zeros((1, hidden))), Tensor(np.zeros((1, hidden))))

    def detach(self) -> "HiddenState":
        return HiddenState(self.h.detach(), self.c.detach())


@dataclass(frozen=True)
class PolicyOutput:
    """logits: 1×6 (행동 순서 고정), value: 1×1."""
    logits: Tensor
    value: Tensor


# =========================================================================
# 파라미터
# =========================================================================

def _kaiming_uniform(rng: np.random.Generator, fan_in: int, fan_out: int) -> np.ndarray:
    bound = np.sqrt(6.0 / fan_in)
    return rng.uniform(-bound, bound, size=(fan_in, fan_out))


def init_params(config: ModelConfig, embed_dim: int, seed: Optional[int] = None) -> ParamSet:
    """변형에 필요한 파라미터만 고정된 순서로 등록합니다.

    Args:
        config (ModelConfig): 모델 차원과 변형.
        embed_dim (int): 임베딩 차원 E.
        seed (Optional[int]): 초기화 시드 (None 이면 config.seed).

    Returns:
        ParamSet: 초기화된 파라미터.
    """
    if config.variant not in VARIANTS:
        raise ValueError(f"알 수 없는 모델 변형: {config.variant}")
    rng = np.random.default_rng(config.seed if seed is None else seed)
    width = 3 + embed_dim
    params = ParamSet()

    def add_linear(prefix: str, fan_in: int, fan_out: int, scale: float = 1.0) -> None:
        params.register(f"{prefix}.W", _kaiming_uniform(rng, fan_in, fan_out) * scale)
        params.register(f"{prefix}.b", np.zeros((1, fan_out)))

    if uses_target_attention(config.variant):
        add_linear("ta", width, config.d_att)
    add_linear("linear1", width, config.d_l1)
    add_linear("sa", config.d_l1, config.d_sa)
    if not uses_siamese(config.variant):
        add_linear("sa_concat", 2 * config.d_sa, config.d_sa)
    add_linear("ffn", config.d_sa, config.ffn)

    hidden = config.hidden
    bound = 1.0 / np.sqrt(hidden)
    params.register("lstm.W_x", rng.uniform(-bound, bound, size=(config.ffn, 4 * hidden)))
    params.register("lstm.W_h", rng.uniform(-bound, bound, size=(hidden, 4 * hidden)))
    params.register("lstm.b", np.zeros((1, 4 * hidden)))

    add_linear("actor", hidden, NUM_ACTIONS, scale=ACTOR_INIT_SCALE)
    add_linear("critic", hidden, 1)
    return params


def count_params(params: ParamSet) -> int:
    return params.num_scalars()


# =========================================================================
# 모듈
# =========================================================================

def target_attention(m_d: Tensor, v_t: Tensor, params: ParamSet) -> tuple[Tensor, Tensor, Tensor]:
    """타겟 어텐션.

    V_corr = (V_t W_L + b_L)(M_d W_L + b_L)ᵀ,  V_att = softmax(V_corr),  V_L1 = V_att · Linear1(M_d)

    두 입력에 같은 W_L, b_L 을 사용합니다.

    Args:
        m_d (Tensor): n × (3+E) 검출 행렬.
        v_t (Tensor): 1 × (3+E) 목표 벡터.
        params (ParamSet): 'ta.*', 'linear1.*' 포함.

    Returns:
        tuple[Tensor, Tensor, Tensor]: (V_corr 1×n, V_att 1×n, V_L1 1×d_L1)
    """
    w_l, b_l = params["ta.W"], params["ta.b"]
    query = linear(v_t, w_l, b_l)
    keys = linear(m_d, w_l, b_l)
    corr = T.matmul(query, T.transpose(keys))
    att = softmax(corr)
    m_l1 = linear(m_d, params["linear1.W"], params["linear1.b"])
    return corr, att, T.matmul(att, m_l1)


def mean_features(m_d: Tensor, params: ParamSet) -> Tensor:
    """TA 없이 관측된 모든 객체 특징의 평균을 사용합니다."""
    return T.mean_rows(linear(m_d, params["linear1.W"], params["linear1.b"]))


def _branch(x: Tensor, params: ParamSet) -> Tensor:
    return T.relu(linear(x, params["sa.W"], params["sa.b"]))


def siamese_diff(
    v_l1: Tensor,
    v_t: Tensor,
    params: ParamSet,
    mode: Mode,
    rng: Optional[np.random.Generator],
    rate: float,
) -> Tensor:
    """가중치를 공유하는 두 가지 출력의 절댓값 차이 (+ dropout).

    관측 가지 입력은 V_L1, 목표 가지 입력은 Linear1(V_t) 입니다.

    Returns:
        Tensor: 1 × d_sa 표현.
    """
    target_l1 = linear(v_t, params["linear1.W"], params["linear1.b"])
    diff = T.absolute(T.sub(_branch(v_l1, params), _branch(target_l1, params)))
    return dropout(diff, rate, mode, rng)


def siamese_concat(
    v_l1: Tensor,
    v_t: Tensor,
    params: ParamSet,
    mode: Mode,
    rng: Optional[np.random.Generator],
    rate: float,
) -> Tensor:
    target_l1 = linear(v_t, params["linear1.W"], params["linear1.b"])
    joined = T.concat_cols(_branch(v_l1, params), _branch(target_l1, params))
    out = linear(joined, params["sa_concat.W"], params["sa_concat.b"])
    return dropout(out, rate, mode, rng)


class TdaNet:
    """TDANet 정책/가치 네트워크.

    파라미터는 외부(ParamSet)에 두고 forward 는 순수 함수로 동작합니다.
    여러 워커가 같은 읽기 전용 스냅샷으로 동시에 forward 를 호출할 수 있습니다.

    Attributes:
        config (ModelConfig): 모델 설정.
        table (EmbeddingTable): 클래스 임베딩.
    """

    def __init__(self, config: ModelConfig, table: EmbeddingTable):
        self.config = config
        self.table = table

    @property
    def variant(self) -> str:
        return self.config.variant

    @property
    def input_width(self) -> int:
        return feature_width(self.table)

    def init_params(self, seed: Optional[int] = None) -> ParamSet:
        return init_params(self.config, self.table.dim, seed)

    def initial_hidden(self) -> HiddenState:
        return HiddenState.zeros(self.config.hidden)

    def encode(
        self,
        detections: Sequence[Detection],
        target: str,
        params: ParamSet,
        mode: Mode,
        rng: Optional[np.random.Generator],
    ) -> tuple[Tensor, Optional[AttentionTrace]]:
        """검출/목표 → d_sa 표현 (LSTM 입력 전 단계)."""
        m_d = build_detected_matrix(detections, self.table)
        v_t = build_target_vector(target, self.table)

        trace = None
        if uses_target_attention(self.variant):
            corr, att, v_l1 = target_attention(m_d, v_t, params)
            trace = AttentionTrace(
                detections=tuple(detections),
                corr=corr.numpy()[0].copy(),
                att=att.numpy()[0].copy(),
            )
        else:
            v_l1 = mean_features(m_d, params)

        combine = siamese_diff if uses_siamese(self.variant) else siamese_concat
        return combine(v_l1, v_t, params, mode, rng, self.config.dropout), trace

    def forward(
        self,
        params: ParamSet,
        detections: Sequence[Detection],
        target: str,
        hidden: HiddenState,
        mode: Mode = Mode.EVAL,
        rng: Optional[np.random.Generator] = None,
    ) -> tuple[PolicyOutput, HiddenState, Optional[AttentionTrace]]:
        """한 스텝 forward.

        Args:
            params (ParamSet): 파라미터 (스냅샷 가능).
            detections (Sequence[Detection]): 현재 관측의 검출 목록.
            target (str): 목표 클래스.
            hidden (HiddenState): 이전 LSTM 상태.
            mode (Mode): TRAIN 이면 dropout 활성.
            rng (Optional[np.random.Generator]): TRAIN 모드 dropout 마스크용.

        Returns:
            tuple[PolicyOutput, HiddenState, Optional[AttentionTrace]]: TA 변형이 아니면 trace 는 None.
        """
        representation, trace = self.encode(detections, target, params, mode, rng)
        features = T.relu(linear(representation, params["ffn.W"], params["ffn.b"]))
        weights = LstmWeights(params["lstm.W_x"], params["lstm.W_h"], params["lstm.b"])
        h, c = lstm_step(features, hidden.h, hidden.c, weights)
        logits = linear(h, params["actor.W"], params["actor.b"])
        value = linear(h, params["critic.W"], params["critic.b"])
        return PolicyOutput(logits, value), HiddenState(h, c), trace
