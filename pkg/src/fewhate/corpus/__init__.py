from fewhate.corpus.records import (
    PostRecord,
    Source,
    Split,
    TargetType,
    canonicalize_group,
    read_corpus,
    write_corpus,
)
from fewhate.corpus.ood import load_ethos, load_hatexplain, load_hs18
from fewhate.corpus.sbic import RawSbicAnnotation, aggregate_sbic, load_sbic

__all__ = [
    "PostRecord",
    "RawSbicAnnotation",
    "Source",
    "Split",
    "TargetType",
    "aggregate_sbic",
    "canonicalize_group",
    "load_ethos",
    "load_hatexplain",
    "load_hs18",
    "load_sbic",
    "read_corpus",
    "write_corpus",
]
