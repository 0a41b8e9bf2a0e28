import pytest
import torch

WORDS = [
    "[PAD]", "[UNK]", "[CLS]", "[SEP]", "[MASK]",
    "revenue", "increased", "by", "the", "a", "to", "of", "in", "at", "on",
    "and", "net", "sales", "shares", "rose", "fell", "stock", "index",
    "million", "billion", "units", "week", "weeks", "day", "days", "month",
    "months", "year", "years", "hour", "hours", "minute", "minutes",
    "am", "pm", "jan", "feb", "mar", "apr", "may", "jun", "jul", "aug",
    "sep", "oct", "nov", "dec", "%", ".", ",", "$", ":", "/", "-",
    "0", "1", "2", "3", "4", "5", "6", "7", "8", "9",
    "##0", "##1", "##2", "##3", "##4", "##5", "##6", "##7", "##8", "##9",
    "##s",
]


@pytest.fixture(scope="session")
def tiny_checkpoint(tmp_path_factory) -> str:
    """Local random-weight BERT small enough for fast protocol tests."""
    from transformers import BertConfig, BertModel, BertTokenizer

    path = tmp_path_factory.mktemp("ckpt") / "tiny-bert"
    path.mkdir()
    tokenizer = BertTokenizer(vocab={w: i for i, w in enumerate(WORDS)},
                              do_lower_case=True)
    torch.manual_seed(1234)
    config = BertConfig(vocab_size=len(WORDS), hidden_size=32,
                        num_hidden_layers=2, num_attention_heads=2,
                        intermediate_size=64, max_position_embeddings=128)
    model = BertModel(config)
    model.save_pretrained(path)
    tokenizer.save_pretrained(path)
    return str(path)
