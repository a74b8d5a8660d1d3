"""Per-session autoencoder for embedding enhancement.

One fully-connected encoder layer with a maximum-feature-map (MFM)
non-linearity, one affine decoder layer.  The latent code is split into a
speaker code and a noise code; inverted dropout is applied to the noise
code only during training, pushing reconstruction-essential information
into the dropout-free speaker code.  Optionally a fixed speech/non-speech
indicator vector is added to the input before encoding.

Modes:

* plain dimensionality reduction: ``noise_dim=0, use_indicator=False``
* full disentangled mode: ``noise_dim>0, use_indicator=True``
* the two ablations in between.

Training is plain mini-batch gradient descent, deterministic given the
config seed.  Gradients are computed analytically in closed form (see
``loss_and_grads``); they are checked against finite differences in the
test suite.
"""

from __future__ import annotations

import json
import math
import warnings
from dataclasses import dataclass, field, replace

import numpy as np

from .errors import DimMismatchError, NonFiniteError, TooFewRecordsError
from .rng import Rng
from .sessionio import Session

_STREAM_WEIGHTS = 1
_STREAM_DROPOUT = 2
_STREAM_SHUFFLE = 3
_STREAM_INDICATOR = 4


@dataclass
class AeConfig:
    input_dim: int
    speaker_dim: int = 30
    noise_dim: int = 0
    dropout_rate: float = 0.5
    use_indicator: bool = False
    indicator_scale: float = 1.0
    epochs: int = 50
    batch_size: int = 256
    learning_rate: float = 1e-3
    seed: int = 0
    # extension flags, default to the documented fixed behaviour
    optimizer: str = "gd"  # "gd" (plain descent) or "adam"
    train_indicator: bool = False
    reconstruct_indicator: bool = False

    def __post_init__(self):
        if self.input_dim < 1 or self.speaker_dim < 1 or self.noise_dim < 0:
            raise ValueError("dims must be positive (noise_dim may be 0)")
        if not 0.0 <= self.dropout_rate < 1.0:
            raise ValueError("dropout_rate must be in [0, 1)")
        if self.epochs < 1 or self.batch_size < 1:
            raise ValueError("epochs and batch_size must be >= 1")
        if self.optimizer not in ("gd", "adam"):
            raise ValueError(f"unknown optimizer {self.optimizer!r}")

    @property
    def code_dim(self) -> int:
        return self.speaker_dim + self.noise_dim


@dataclass
class CodePair:
    speaker_code: np.ndarray
    noise_code: np.ndarray


@dataclass
class AutoencoderModel:
    """Trained parameters. Treat as immutable after training."""

    encoder_weight: np.ndarray  # (2 * code_dim, input_dim)
    encoder_bias: np.ndarray  # (2 * code_dim,)
    decoder_weight: np.ndarray  # (input_dim, code_dim)
    decoder_bias: np.ndarray  # (input_dim,)
    indicator_speech: np.ndarray  # (input_dim,)
    indicator_nonspeech: np.ndarray  # (input_dim,)
    config: AeConfig
    loss_history: list[float] = field(default_factory=list)

    def to_json(self) -> str:
        payload = {
            "config": self.config.__dict__,
            "encoder_weight": self.encoder_weight.ravel().tolist(),
            "encoder_bias": self.encoder_bias.tolist(),
            "decoder_weight": self.decoder_weight.ravel().tolist(),
            "decoder_bias": self.decoder_bias.tolist(),
            "indicator_speech": self.indicator_speech.tolist(),
            "indicator_nonspeech": self.indicator_nonspeech.tolist(),
            "loss_history": self.loss_history,
        }
        return json.dumps(payload)

    @classmethod
    def from_json(cls, blob: str) -> "AutoencoderModel":
        payload = json.loads(blob)
        cfg = AeConfig(**payload["config"])
        m = cfg.code_dim
        d = cfg.input_dim
        return cls(
            encoder_weight=np.array(payload["encoder_weight"]).reshape(2 * m, d),
            encoder_bias=np.array(payload["encoder_bias"]),
            decoder_weight=np.array(payload["decoder_weight"]).reshape(d, m),
            decoder_bias=np.array(payload["decoder_bias"]),
            indicator_speech=np.array(payload["indicator_speech"]),
            indicator_nonspeech=np.array(payload["indicator_nonspeech"]),
            config=cfg,
            loss_history=list(payload["loss_history"]),
        )


def mfm(x) -> np.ndarray:
    """Maximum feature map: elementwise max of the two halves of a vector."""
    v = np.asarray(x, dtype=np.float64)
    if v.shape[-1] % 2 != 0:
        raise ValueError(f"mfm needs an even length, got {v.shape[-1]}")
    m = v.shape[-1] // 2
    return np.maximum(v[..., :m], v[..., m:])


def _indicator_offsets(model: AutoencoderModel, speech: np.ndarray) -> np.ndarray:
    return np.where(
        speech[:, None], model.indicator_speech[None, :], model.indicator_nonspeech[None, :]
    )


def encode_batch(model: AutoencoderModel, x: np.ndarray, speech: np.ndarray) -> np.ndarray:
    """Latent codes for a batch of embeddings (rows), dropout disabled."""
    x = np.asarray(x, dtype=np.float64)
    if x.shape[1] != model.config.input_dim:
        raise DimMismatchError(f"input dim {x.shape[1]} != model dim {model.config.input_dim}")
    xin = x + _indicator_offsets(model, np.asarray(speech, dtype=bool)) if model.config.use_indicator else x
    pre = xin @ model.encoder_weight.T + model.encoder_bias
    return mfm(pre)


def encode(model: AutoencoderModel, x, speech: bool) -> CodePair:
    """Encode one embedding into its (speaker code, noise code) pair."""
    codes = encode_batch(model, np.asarray(x, dtype=np.float64)[None, :], np.array([speech]))
    ds = model.config.speaker_dim
    return CodePair(speaker_code=codes[0, :ds].copy(), noise_code=codes[0, ds:].copy())


def decode(model: AutoencoderModel, codes: CodePair) -> np.ndarray:
    """Affine reconstruction from a concatenated code pair."""
    full = np.concatenate([codes.speaker_code, codes.noise_code])
    if full.shape[0] != model.config.code_dim:
        raise DimMismatchError(f"code dim {full.shape[0]} != model dim {model.config.code_dim}")
    return model.decoder_weight @ full + model.decoder_bias


def loss_and_grads(
    model: AutoencoderModel,
    x: np.ndarray,
    speech: np.ndarray,
    dropout_mask: np.ndarray | None,
):
    """Mean reconstruction loss over a batch and its analytic gradients.

    Loss per record is the squared L2 error between the reconstruction and
    the original embedding (the indicator offset is excluded from the
    target unless ``reconstruct_indicator``); the batch loss is the mean.
    ``dropout_mask`` is the inverted-dropout multiplier applied to the
    noise code, shape (batch, noise_dim), or None for no dropout.

    Returns (loss, grads) where grads is a dict over parameter names; the
    indicator gradients are present only with ``train_indicator``.
    """
    cfg = model.config
    ds = cfg.speaker_dim
    b = x.shape[0]

    xin = x + _indicator_offsets(model, speech) if cfg.use_indicator else x
    target = xin if (cfg.use_indicator and cfg.reconstruct_indicator) else x

    pre = xin @ model.encoder_weight.T + model.encoder_bias  # (b, 2m)
    m = pre.shape[1] // 2
    first, second = pre[:, :m], pre[:, m:]
    take_first = first >= second  # gradient routes to the first half on ties
    h = np.where(take_first, first, second)  # (b, m)
    h_used = h.copy()
    if dropout_mask is not None and cfg.noise_dim > 0:
        h_used[:, ds:] = h[:, ds:] * dropout_mask
    recon = h_used @ model.decoder_weight.T + model.decoder_bias  # (b, d)

    err = recon - target
    loss = float(np.sum(err * err) / b)

    d_recon = 2.0 * err / b
    g_dec_w = d_recon.T @ h_used
    g_dec_b = d_recon.sum(axis=0)
    d_h = d_recon @ model.decoder_weight
    if dropout_mask is not None and cfg.noise_dim > 0:
        d_h[:, ds:] *= dropout_mask
    d_pre = np.concatenate([d_h * take_first, d_h * ~take_first], axis=1)
    g_enc_w = d_pre.T @ xin
    g_enc_b = d_pre.sum(axis=0)

    grads = {
        "encoder_weight": g_enc_w,
        "encoder_bias": g_enc_b,
        "decoder_weight": g_dec_w,
        "decoder_bias": g_dec_b,
    }
    if cfg.use_indicator and cfg.train_indicator:
        d_xin = d_pre @ model.encoder_weight
        if cfg.reconstruct_indicator:
            d_xin = d_xin - d_recon  # target moves with the indicator too
        sp = speech.astype(bool)
        grads["indicator_speech"] = d_xin[sp].sum(axis=0)
        grads["indicator_nonspeech"] = d_xin[~sp].sum(axis=0)
    return loss, grads


def batch_loss(model, x, speech, dropout_mask) -> float:
    """Loss only; used by the finite-difference checks."""
    loss, _ = loss_and_grads(model, x, speech, dropout_mask)
    return loss


def init_model(cfg: AeConfig) -> AutoencoderModel:
    """Seeded initial model: uniform(+-1/sqrt(fan_in)) weights, zero biases,
    unit-norm indicator vectors scaled by ``indicator_scale``."""
    wrng = Rng(cfg.seed).spawn(_STREAM_WEIGHTS)
    irng = Rng(cfg.seed).spawn(_STREAM_INDICATOR)
    m = cfg.code_dim
    d = cfg.input_dim
    bound_e = 1.0 / math.sqrt(d)
    bound_d = 1.0 / math.sqrt(m)
    enc_w = (wrng.random(2 * m * d) * 2.0 - 1.0).reshape(2 * m, d) * bound_e
    dec_w = (wrng.random(d * m) * 2.0 - 1.0).reshape(d, m) * bound_d

    def unit(v):
        n = np.linalg.norm(v)
        return v / n if n > 0 else v

    ind_sp = unit(irng.normal(d)) * cfg.indicator_scale
    ind_ns = unit(irng.normal(d)) * cfg.indicator_scale
    return AutoencoderModel(
        encoder_weight=enc_w,
        encoder_bias=np.zeros(2 * m),
        decoder_weight=dec_w,
        decoder_bias=np.zeros(d),
        indicator_speech=ind_sp,
        indicator_nonspeech=ind_ns,
        config=cfg,
    )


def train(session: Session, cfg: AeConfig) -> AutoencoderModel:
    """Train a fresh model on one session's records (speech and non-speech).

    Deterministic given ``cfg.seed``.  Raises TooFewRecordsError on
    undersized sessions and NonFiniteError if the loss diverges.
    """
    records = session.records
    n = len(records)
    if cfg.noise_dim > 0 and n < max(8, cfg.code_dim):
        raise TooFewRecordsError(
            f"session {session.session_id}: {n} records < required {max(8, cfg.code_dim)}"
        )
    if not any(r.speech for r in records):
        raise TooFewRecordsError(f"session {session.session_id}: no speech records")
    if cfg.use_indicator and all(r.speech for r in records):
        warnings.warn(
            f"session {session.session_id}: indicator enabled but no non-speech "
            "records; the non-speech indicator never trains",
            stacklevel=2,
        )
    if session.dim != cfg.input_dim:
        raise DimMismatchError(f"session dim {session.dim} != config input_dim {cfg.input_dim}")

    x = np.stack([r.vector for r in records]).astype(np.float64)
    speech = np.array([r.speech for r in records], dtype=bool)
    if not np.all(np.isfinite(x)):
        raise NonFiniteError("session embeddings contain non-finite values")

    model = init_model(cfg)
    drng = Rng(cfg.seed).spawn(_STREAM_DROPOUT)
    srng = Rng(cfg.seed).spawn(_STREAM_SHUFFLE)
    use_dropout = cfg.noise_dim > 0 and cfg.dropout_rate > 0.0
    keep = 1.0 - cfg.dropout_rate
    step = _make_stepper(model, cfg)

    for _ in range(cfg.epochs):
        order = srng.permutation(n)
        total = 0.0
        for lo in range(0, n, cfg.batch_size):
            idx = order[lo : lo + cfg.batch_size]
            mask = None
            if use_dropout:
                draws = drng.random(len(idx) * cfg.noise_dim).reshape(len(idx), cfg.noise_dim)
                mask = (draws >= cfg.dropout_rate) / keep
            loss, grads = loss_and_grads(model, x[idx], speech[idx], mask)
            total += loss * len(idx)
            step(grads)
        epoch_mean = total / n
        if not np.isfinite(epoch_mean):
            raise NonFiniteError("training diverged (non-finite loss)")
        model.loss_history.append(epoch_mean)
    return model


_ADAM_BETA1 = 0.9
_ADAM_BETA2 = 0.999
_ADAM_EPS = 1e-8


def _make_stepper(model: AutoencoderModel, cfg: AeConfig):
    """Parameter update rule: plain descent or (config-gated) Adam."""
    lr = cfg.learning_rate
    if cfg.optimizer == "gd":

        def step(grads):
            for name, g in grads.items():
                getattr(model, name)[...] -= lr * g

        return step

    m_state: dict[str, np.ndarray] = {}
    v_state: dict[str, np.ndarray] = {}
    t = 0

    def step(grads):
        nonlocal t
        t += 1
        bc1 = 1.0 - _ADAM_BETA1 ** t
        bc2 = 1.0 - _ADAM_BETA2 ** t
        for name, g in grads.items():
            m = m_state.setdefault(name, np.zeros_like(g))
            v = v_state.setdefault(name, np.zeros_like(g))
            m *= _ADAM_BETA1
            m += (1.0 - _ADAM_BETA1) * g
            v *= _ADAM_BETA2
            v += (1.0 - _ADAM_BETA2) * g * g
            getattr(model, name)[...] -= lr * (m / bc1) / (np.sqrt(v / bc2) + _ADAM_EPS)

    return step


def extract_speaker_codes(model: AutoencoderModel, session: Session) -> np.ndarray:
    """Speaker codes of the speech records, in temporal order."""
    speech = session.speech_records()
    if not speech:
        return np.zeros((0, model.config.speaker_dim))
    x = np.stack([r.vector for r in speech])
    codes = encode_batch(model, x, np.ones(len(speech), dtype=bool))
    return codes[:, : model.config.speaker_dim].copy()


def extract_noise_codes(model: AutoencoderModel, session: Session) -> np.ndarray:
    """Noise codes of every record (speech and non-speech), temporal order."""
    if not session.records:
        return np.zeros((0, model.config.noise_dim))
    x = np.stack([r.vector for r in session.records])
    speech = np.array([r.speech for r in session.records], dtype=bool)
    codes = encode_batch(model, x, speech)
    return codes[:, model.config.speaker_dim :].copy()


def dr_config(cfg: AeConfig) -> AeConfig:
    """Collapse a config to the plain-DR baseline (no noise code, no indicator)."""
    return replace(cfg, noise_dim=0, use_indicator=False)
