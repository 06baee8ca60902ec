"""The triplet-extraction network.

A Bi-LSTM encodes word+POS+DEP features per token. At each decoding step an
attention over the encoder states (conditioned on the previous decoder state
and on the running sum of emitted tuple vectors) feeds an LSTM cell, whose
state drives two stacked pointer networks: the first scores span start/end
positions from [encoder state || decoder state] per token, the second
additionally sees the first network's hidden states, capturing the
dependence between the two spans. Soft, probability-weighted span vectors
from both networks form the step's tuple vector, which a linear+softmax head
maps to a sentiment distribution whose fourth label is the stop sentinel.

The generation direction decides whether the first pointer network detects
the aspect span (``af``) or the opinion span (``of``); the computation chain
is otherwise identical, so the two variants share one architecture.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import NamedTuple, Sequence

import torch
from torch import Tensor, nn
from torch.nn.utils.rnn import pack_padded_sequence, pad_packed_sequence

from .corpus import AnnotatedSentence, PAD_ID, Vocabulary
from .triplets import GenerationDirection

#: Additive mask for softmax logits at padded positions; exp() underflows to
#: exactly 0.0 in both float32 and float64.
MASK_SCORE = -1e9


@dataclass
class ModelConfig:
    """Dimensions and switches of the network."""

    d_w: int = 300
    d_pos: int = 50
    d_dep: int = 50
    d_h: int = 300
    d_p: int = 300
    dropout: float = 0.5
    direction: GenerationDirection = GenerationDirection.ASPECT_FIRST
    max_steps: int | None = None

    def __post_init__(self) -> None:
        if isinstance(self.direction, str):
            self.direction = GenerationDirection.parse(self.direction)
        if self.d_w < 1:
            raise ValueError("d_w must be positive")
        if self.d_pos < 0 or self.d_dep < 0:
            raise ValueError("d_pos and d_dep must be non-negative")
        if self.d_h < 2 or self.d_h % 2:
            raise ValueError("d_h must be a positive even number")
        if self.d_p < 2 or self.d_p % 2:
            raise ValueError("d_p must be a positive even number")
        if not 0.0 <= self.dropout < 1.0:
            raise ValueError("dropout must be in [0, 1)")
        if self.max_steps is not None and self.max_steps < 1:
            raise ValueError("max_steps must be at least 1")

    @property
    def uses_pos(self) -> bool:
        return self.d_pos > 0

    @property
    def uses_dep(self) -> bool:
        return self.d_dep > 0

    def to_dict(self) -> dict:
        return {
            "d_w": self.d_w,
            "d_pos": self.d_pos,
            "d_dep": self.d_dep,
            "d_h": self.d_h,
            "d_p": self.d_p,
            "dropout": self.dropout,
            "direction": self.direction.value,
            "max_steps": self.max_steps,
        }

    @classmethod
    def from_dict(cls, data: dict) -> "ModelConfig":
        return cls(**data)


@dataclass
class SentenceBatch:
    """Padded id tensors for a batch of sentences."""

    token_ids: Tensor
    pos_ids: Tensor | None
    dep_ids: Tensor | None
    lengths: Tensor  # CPU int64, needed by pack_padded_sequence
    mask: Tensor  # bool, True at real tokens

    @property
    def batch_size(self) -> int:
        return self.token_ids.shape[0]

    @property
    def max_len(self) -> int:
        return self.token_ids.shape[1]


def make_batch(
    sentences: Sequence[AnnotatedSentence],
    vocab: Vocabulary,
    device: torch.device | str | None = None,
) -> SentenceBatch:
    """Pad a list of sentences into id tensors; tags map to ids when present."""
    if not sentences:
        raise ValueError("empty batch")
    lengths = [len(s) for s in sentences]
    max_len = max(lengths)
    batch = len(sentences)
    token_ids = torch.full((batch, max_len), PAD_ID, dtype=torch.long)
    all_pos = all(s.pos_tags is not None for s in sentences)
    all_dep = all(s.dep_labels is not None for s in sentences)
    pos_ids = torch.full((batch, max_len), PAD_ID, dtype=torch.long) if all_pos else None
    dep_ids = torch.full((batch, max_len), PAD_ID, dtype=torch.long) if all_dep else None
    mask = torch.zeros((batch, max_len), dtype=torch.bool)
    for b, sentence in enumerate(sentences):
        n = len(sentence)
        token_ids[b, :n] = torch.tensor(
            [vocab.word_id(t) for t in sentence.tokens], dtype=torch.long
        )
        if pos_ids is not None:
            pos_ids[b, :n] = torch.tensor(
                [vocab.pos_id(t) for t in sentence.pos_tags], dtype=torch.long
            )
        if dep_ids is not None:
            dep_ids[b, :n] = torch.tensor(
                [vocab.dep_id(t) for t in sentence.dep_labels], dtype=torch.long
            )
        mask[b, :n] = True
    if device is not None:
        token_ids = token_ids.to(device)
        pos_ids = pos_ids.to(device) if pos_ids is not None else None
        dep_ids = dep_ids.to(device) if dep_ids is not None else None
        mask = mask.to(device)
    return SentenceBatch(
        token_ids=token_ids,
        pos_ids=pos_ids,
        dep_ids=dep_ids,
        lengths=torch.tensor(lengths, dtype=torch.long),
        mask=mask,
    )


class SpanPrediction(NamedTuple):
    """One pointer network's output for a step."""

    start_probs: Tensor  # (B, n)
    end_probs: Tensor  # (B, n)
    span_vec: Tensor  # (B, 2*d_p)
    token_states: Tensor  # (B, n, d_p)


@dataclass
class DecoderStepOutput:
    """Everything one decoding step produces, batch-first.

    The four pointer distributions are labeled by entity; which of them came
    from the first pointer network depends on the generation direction.
    ``tuple_vec`` keeps the networks' role order (first || second), so under
    aspect-first generation it equals aspect_vec || opinion_vec.
    """

    aspect_start_probs: Tensor
    aspect_end_probs: Tensor
    opinion_start_probs: Tensor
    opinion_end_probs: Tensor
    aspect_vec: Tensor
    opinion_vec: Tensor
    tuple_vec: Tensor
    sentiment_probs: Tensor
    decoder_state: Tensor


def _run_packed(lstm: nn.LSTM, inputs: Tensor, lengths: Tensor) -> Tensor:
    packed = pack_padded_sequence(
        inputs, lengths, batch_first=True, enforce_sorted=False
    )
    states, _ = lstm(packed)
    padded, _ = pad_packed_sequence(
        states, batch_first=True, total_length=inputs.shape[1]
    )
    return padded


def masked_softmax(scores: Tensor, mask: Tensor) -> Tensor:
    return torch.softmax(scores.masked_fill(~mask, MASK_SCORE), dim=-1)


class PointerNetwork(nn.Module):
    """Bi-LSTM over per-token features plus affine start/end scoring heads."""

    def __init__(self, input_dim: int, d_p: int):
        super().__init__()
        self.lstm = nn.LSTM(
            input_dim, d_p // 2, batch_first=True, bidirectional=True
        )
        self.start_head = nn.Linear(d_p, 1)
        self.end_head = nn.Linear(d_p, 1)

    def forward(self, inputs: Tensor, lengths: Tensor, mask: Tensor) -> SpanPrediction:
        states = _run_packed(self.lstm, inputs, lengths)  # (B, n, d_p)
        start_probs = masked_softmax(self.start_head(states).squeeze(-1), mask)
        end_probs = masked_softmax(self.end_head(states).squeeze(-1), mask)
        start_vec = torch.bmm(start_probs.unsqueeze(1), states).squeeze(1)
        end_vec = torch.bmm(end_probs.unsqueeze(1), states).squeeze(1)
        span_vec = torch.cat([start_vec, end_vec], dim=-1)
        return SpanPrediction(start_probs, end_probs, span_vec, states)


class SentenceAttention(nn.Module):
    """Two-query additive attention over encoder states.

    One query comes from a projection of the accumulated tuple vector, the
    other from the previous decoder state; their softmax weight vectors are
    averaged before the weighted sum, so the combined weights still form a
    probability distribution over tokens.
    """

    def __init__(self, d_h: int, d_p: int):
        super().__init__()
        self.tuple_proj = nn.Linear(4 * d_p, d_h)
        self.encoder_proj = nn.Linear(d_h, d_h, bias=False)
        self.tuple_query = nn.Linear(d_h, d_h)
        self.state_query = nn.Linear(d_h, d_h)
        self.tuple_score = nn.Linear(d_h, 1, bias=False)
        self.state_score = nn.Linear(d_h, 1, bias=False)

    def forward(
        self, enc_states: Tensor, mask: Tensor, dec_state: Tensor, tup_prev: Tensor
    ) -> tuple[Tensor, Tensor]:
        if enc_states.shape[1] == 0:
            raise ValueError("attention over an empty sentence")
        keys = self.encoder_proj(enc_states)  # (B, n, d_h)
        tuple_q = self.tuple_query(self.tuple_proj(tup_prev)).unsqueeze(1)
        state_q = self.state_query(dec_state).unsqueeze(1)
        tuple_scores = self.tuple_score(torch.tanh(tuple_q + keys)).squeeze(-1)
        state_scores = self.state_score(torch.tanh(state_q + keys)).squeeze(-1)
        weights = 0.5 * (
            masked_softmax(tuple_scores, mask) + masked_softmax(state_scores, mask)
        )
        context = torch.bmm(weights.unsqueeze(1), enc_states).squeeze(1)
        return context, weights


class TripletExtractionModel(nn.Module):
    """End-to-end extractor decoding one full opinion triplet per step."""

    def __init__(self, config: ModelConfig, vocab: Vocabulary):
        super().__init__()
        self.config = config
        self.word_emb = nn.Embedding(vocab.num_words, config.d_w)
        self.pos_emb = (
            nn.Embedding(vocab.num_pos, config.d_pos) if config.uses_pos else None
        )
        self.dep_emb = (
            nn.Embedding(vocab.num_dep, config.d_dep) if config.uses_dep else None
        )
        self.emb_dropout = nn.Dropout(config.dropout)
        input_dim = config.d_w + config.d_pos + config.d_dep
        self.encoder = nn.LSTM(
            input_dim, config.d_h // 2, batch_first=True, bidirectional=True
        )
        self.attention = SentenceAttention(config.d_h, config.d_p)
        self.decoder_cell = nn.LSTMCell(config.d_h + 4 * config.d_p, config.d_h)
        self.first_pointer = PointerNetwork(2 * config.d_h, config.d_p)
        self.second_pointer = PointerNetwork(2 * config.d_h + config.d_p, config.d_p)
        self.sentiment_head = nn.Linear(4 * config.d_p + config.d_h, 4)
        self._init_embeddings(vocab)

    def _init_embeddings(self, vocab: Vocabulary) -> None:
        nn.init.uniform_(self.word_emb.weight, -0.1, 0.1)
        if self.pos_emb is not None:
            nn.init.uniform_(self.pos_emb.weight, -0.1, 0.1)
        if self.dep_emb is not None:
            nn.init.uniform_(self.dep_emb.weight, -0.1, 0.1)
        if vocab.word_vectors is not None:
            if vocab.word_vectors.shape[1] != self.config.d_w:
                raise ValueError(
                    f"pre-trained vectors have dimension "
                    f"{vocab.word_vectors.shape[1]} but d_w={self.config.d_w}"
                )
            with torch.no_grad():
                pretrained = torch.from_numpy(vocab.word_vectors).to(
                    self.word_emb.weight.dtype
                )
                rows = torch.from_numpy(vocab.has_vector)
                self.word_emb.weight[rows] = pretrained[rows]

    def encode(self, batch: SentenceBatch) -> Tensor:
        """Contextualize the batch: (B, n, d_h) encoder states."""
        parts = [self.word_emb(batch.token_ids)]
        if self.pos_emb is not None:
            if batch.pos_ids is None:
                raise ValueError("model uses POS features but batch is unannotated")
            parts.append(self.pos_emb(batch.pos_ids))
        if self.dep_emb is not None:
            if batch.dep_ids is None:
                raise ValueError("model uses DEP features but batch is unannotated")
            parts.append(self.dep_emb(batch.dep_ids))
        embedded = self.emb_dropout(torch.cat(parts, dim=-1))
        return _run_packed(self.encoder, embedded, batch.lengths)

    def attention_step(
        self, enc_states: Tensor, mask: Tensor, dec_state: Tensor, tup_prev: Tensor
    ) -> tuple[Tensor, Tensor]:
        """Context vector and combined attention weights for one step."""
        return self.attention(enc_states, mask, dec_state, tup_prev)

    def decoder_step(
        self, context: Tensor, tup_prev: Tensor, state: tuple[Tensor, Tensor]
    ) -> tuple[Tensor, Tensor]:
        """One LSTM-cell update on [context || accumulated tuple vector]."""
        return self.decoder_cell(torch.cat([context, tup_prev], dim=-1), state)

    def pointer_pass(
        self, enc_states: Tensor, lengths: Tensor, mask: Tensor, dec_state: Tensor
    ) -> tuple[SpanPrediction, SpanPrediction]:
        """Run both pointer networks; returns (first, second) role-ordered."""
        expanded = dec_state.unsqueeze(1).expand(-1, enc_states.shape[1], -1)
        first = self.first_pointer(
            torch.cat([enc_states, expanded], dim=-1), lengths, mask
        )
        second = self.second_pointer(
            torch.cat([enc_states, first.token_states, expanded], dim=-1),
            lengths,
            mask,
        )
        return first, second

    def classify_sentiment(self, tuple_vec: Tensor, dec_state: Tensor) -> Tensor:
        """Probability 4-vector over POS/NEG/NEU/NONE."""
        logits = self.sentiment_head(torch.cat([tuple_vec, dec_state], dim=-1))
        return torch.softmax(logits, dim=-1)

    def forward(self, batch: SentenceBatch, steps: int) -> list[DecoderStepOutput]:
        """Decode ``steps`` triplet candidates for each sentence in the batch."""
        if steps < 1:
            raise ValueError("steps must be at least 1")
        enc_states = self.encode(batch)
        device = enc_states.device
        dtype = enc_states.dtype
        batch_size = batch.batch_size
        hidden = torch.zeros(batch_size, self.config.d_h, device=device, dtype=dtype)
        cell = torch.zeros(batch_size, self.config.d_h, device=device, dtype=dtype)
        tup_prev = torch.zeros(
            batch_size, 4 * self.config.d_p, device=device, dtype=dtype
        )
        aspect_first = self.config.direction is GenerationDirection.ASPECT_FIRST
        outputs = []
        for _ in range(steps):
            context, _ = self.attention_step(enc_states, batch.mask, hidden, tup_prev)
            hidden, cell = self.decoder_step(context, tup_prev, (hidden, cell))
            first, second = self.pointer_pass(
                enc_states, batch.lengths, batch.mask, hidden
            )
            tuple_vec = torch.cat([first.span_vec, second.span_vec], dim=-1)
            sentiment = self.classify_sentiment(tuple_vec, hidden)
            aspect, opinion = (first, second) if aspect_first else (second, first)
            outputs.append(
                DecoderStepOutput(
                    aspect_start_probs=aspect.start_probs,
                    aspect_end_probs=aspect.end_probs,
                    opinion_start_probs=opinion.start_probs,
                    opinion_end_probs=opinion.end_probs,
                    aspect_vec=aspect.span_vec,
                    opinion_vec=opinion.span_vec,
                    tuple_vec=tuple_vec,
                    sentiment_probs=sentiment,
                    decoder_state=hidden,
                )
            )
            tup_prev = tup_prev + tuple_vec
        return outputs
