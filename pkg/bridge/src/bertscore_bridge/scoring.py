"""BERTScore-F1 computation for one checkpoint.

Uses the official bert_score package when it is importable. Otherwise falls
back to an equivalent direct computation with transformers: encode both
sentences, take the hidden states of the configured layer, L2-normalize per
token, greedy-max cosine alignment in both directions, F1 of the two means.
[CLS]/[SEP] positions stay available as alignment targets but are excluded
from the means, matching the reference implementation's zero-weight
handling of special tokens.
"""

from __future__ import annotations

import logging
from dataclasses import dataclass
from typing import Optional

import torch

logger = logging.getLogger(__name__)

# reference defaults for common checkpoints; anything unknown uses its last
# hidden layer
KNOWN_LAYERS = {
    "bert-base-uncased": 9,
    "roberta-large": 17,
}


@dataclass
class BridgeConfig:
    checkpoint: str
    batch_size: int = 32
    device: str = "cpu"
    layer: Optional[int] = None  # None = KNOWN_LAYERS or last layer
    local_files_only: bool = False


def resolve_layer(config: BridgeConfig, num_hidden_layers: int) -> int:
    if config.layer is not None:
        return min(config.layer, num_hidden_layers)
    default = KNOWN_LAYERS.get(config.checkpoint.lower().split("/")[-1],
                               KNOWN_LAYERS.get(config.checkpoint.lower()))
    if default is None:
        return num_hidden_layers
    return min(default, num_hidden_layers)


class OfficialScorer:
    """Thin wrapper over bert_score.BERTScorer (F1, no idf, no rescaling)."""

    def __init__(self, config: BridgeConfig, bert_score_module):
        layer = config.layer
        kwargs = {"model_type": config.checkpoint, "idf": False,
                  "rescale_with_baseline": False, "device": config.device,
                  "batch_size": config.batch_size}
        if layer is not None:
            kwargs["num_layers"] = layer
        self._scorer = bert_score_module.BERTScorer(**kwargs)

    def score_pairs(self, candidates: list[str], references: list[str]) -> list[float]:
        _, _, f1 = self._scorer.score(candidates, references)
        return [float(x) for x in f1]


class DirectScorer:
    """Transformers-based BERTScore-F1 (used when bert_score is absent)."""

    def __init__(self, config: BridgeConfig):
        from transformers import AutoModel, AutoTokenizer

        self.config = config
        self.tokenizer = AutoTokenizer.from_pretrained(
            config.checkpoint, local_files_only=config.local_files_only)
        self.model = AutoModel.from_pretrained(
            config.checkpoint, local_files_only=config.local_files_only,
            output_hidden_states=True)
        self.model.eval().to(config.device)
        self.layer = resolve_layer(config, self.model.config.num_hidden_layers)
        logger.info("loaded %s (layer %d)", config.checkpoint, self.layer)

    @torch.no_grad()
    def _embed(self, sentences: list[str]) -> tuple[torch.Tensor, torch.Tensor, torch.Tensor]:
        enc = self.tokenizer(sentences, return_tensors="pt", padding=True,
                             truncation=True).to(self.config.device)
        hidden = self.model(**enc).hidden_states[self.layer]
        hidden = torch.nn.functional.normalize(hidden, dim=-1)
        attention = enc["attention_mask"].bool()
        special = torch.zeros_like(attention)
        for special_id in self.tokenizer.all_special_ids:
            special |= enc["input_ids"] == special_id
        return hidden, attention, attention & ~special

    @torch.no_grad()
    def score_pairs(self, candidates: list[str], references: list[str]) -> list[float]:
        scores: list[float] = []
        step = self.config.batch_size
        for lo in range(0, len(candidates), step):
            c_hid, c_attn, c_content = self._embed(candidates[lo:lo + step])
            r_hid, r_attn, r_content = self._embed(references[lo:lo + step])
            sim = torch.bmm(c_hid, r_hid.transpose(1, 2))
            # padded positions may not serve as alignment targets
            sim = sim.masked_fill(~r_attn[:, None, :], -1.0)
            precision_tok = sim.max(dim=2).values
            sim_t = sim.masked_fill(~c_attn[:, :, None], -1.0)
            recall_tok = sim_t.max(dim=1).values
            for b in range(precision_tok.shape[0]):
                p = precision_tok[b][c_content[b]].mean().item()
                r = recall_tok[b][r_content[b]].mean().item()
                scores.append(2 * p * r / (p + r) if p + r else 0.0)
        return scores


def load_scorer(config: BridgeConfig):
    try:
        import bert_score  # noqa: F401
    except ImportError:
        return DirectScorer(config)
    return OfficialScorer(config, bert_score)
