from .base import (
    CodecWindow,
    Tokenizer,
    TokenizerCategory,
    TokenSeq,
    WordSpan,
    split_words,
)
from .incremental import context_tail, decode_incremental, encode_incremental
from .loaders import dump_tokenizer_spec, load_tokenizer
from .overlap import vocab_overlap
from .toy import (
    MARKER,
    BpeTokenizer,
    ByteTokenizer,
    PrefixSpaceTokenizer,
    WordTokenizer,
    pretokenize_words,
)

__all__ = [
    "CodecWindow",
    "Tokenizer",
    "TokenizerCategory",
    "TokenSeq",
    "WordSpan",
    "split_words",
    "context_tail",
    "decode_incremental",
    "encode_incremental",
    "dump_tokenizer_spec",
    "load_tokenizer",
    "vocab_overlap",
    "MARKER",
    "BpeTokenizer",
    "ByteTokenizer",
    "PrefixSpaceTokenizer",
    "WordTokenizer",
    "pretokenize_words",
]
