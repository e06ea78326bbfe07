"""Weak-supervision pipeline for classifying social-media posts as
solidarity / anti-solidarity / other: corpus handling, annotation
aggregation, augmentation, a native baseline classifier, self-labeling and
ensembling, and temporal trend analytics.
"""

__version__ = "0.1.0"

from .annotation import (  # noqa: F401
    COARSE_ORDER,
    Annotation,
    AnnotatorProfile,
    GoldStandard,
    LabelCoarse,
    LabelFine,
    aggregate_crowd,
    build_gold,
    collapse_label,
    compute_reliability,
)
from .augment import (  # noqa: F401
    LabeledDataset,
    LabeledExample,
    MockTranslator,
    Provenance,
    RemoteTranslator,
    Translator,
    back_translate,
    oversample,
)
from .corpus import (  # noqa: F401
    Corpus,
    Tweet,
    expand_hashtags,
    extract_hashtags,
    filter_by_hashtags,
    parse_corpus,
    parse_corpus_lenient,
)
from .metrics import (  # noqa: F401
    ConfusionMatrix,
    KappaResult,
    MetricsReport,
    cohen_kappa,
    confusion,
    fleiss_kappa,
    macro_f1,
    mean_pairwise_kappa,
)
from .model import (  # noqa: F401
    BaselineModel,
    ClassifierHandle,
    FeatureMode,
    TrainConfig,
    featurize,
    predict,
    predict_label,
    train_baseline,
)
from .trends import (  # noqa: F401
    CorrelationResult,
    DailySeries,
    ExternalSeries,
    RatioSeries,
    daily_counts,
    sa_ratio,
    spearman,
    weekly_average,
)
from .weak_supervision import (  # noqa: F401
    AutoLabelConfig,
    AutoLabelResult,
    ModelPool,
    auto_label,
    ensemble_predict,
    select_top_k,
)
