"""Teacher-student alignment training for transliterated-text transfer."""

from .augment import (
    DictionaryTranslator,
    LabeledExample,
    ParallelTriplet,
    build_triplets,
    read_corpus,
    read_triplets,
    translate,
    write_corpus,
    write_triplets,
)
from .autodiff import ComputationRecord, Tensor, backward
from .encoder import (
    EncoderConfig,
    EncoderOutput,
    EncoderParams,
    TokenizerSpec,
    encode,
    load_checkpoint,
    make_teacher,
    save_checkpoint,
    set_freeze_depth,
    tokenize,
)
from .errors import (
    ConfigError,
    ContractError,
    DomainError,
    LoadError,
    ShapeError,
    TranslignError,
)
from .evaluation import AlignmentReport, alignment_diagnostics, freeze_sweep, project2d
from .gradcheck import GradCheckReport, finite_diff_check, run_battery
from .losses import bce_loss, cosine_distance, rowwise_cosine_distance
from .metrics import MetricsReport, accuracy, classification_report, weighted_f1
from .optim import Adam
from .trainer import (
    BatchLosses,
    LossWeights,
    TrainConfig,
    TrainResult,
    alignment_loss,
    joint_classification_loss,
    parse_config,
    total_loss,
    train,
    train_step,
)
from .translit import (
    MappingTable,
    TransliterationResult,
    cipher_table,
    cipher_transliterate,
    invert_cipher_key,
    load_table,
    transliterate,
)

__version__ = "0.1.0"
