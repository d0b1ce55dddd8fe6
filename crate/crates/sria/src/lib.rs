//! Cut-paste synthesis of annotated object-detection datasets, plus the
//! surrounding toolbox: automatic mask extraction, box-supervised mask
//! losses, dataset interchange formats, and detection evaluation.
//!
//! The pipeline in one breath: photograph objects on plain plates, threshold
//! them into masks ([`mask_lab`]), cut them out as alpha-matted patches
//! ([`catalog`]), randomize their geometry ([`transforms`]), paste them onto
//! background plates under truncation/occlusion constraints ([`compositor`]),
//! schedule six augmentation batches per class ([`scheduler`]), and emit a
//! ready-to-train dataset with detector-txt and COCO annotations
//! ([`dataset_io`]). Trained models are scored with [`evaluator`].
//!
//! Every random decision flows from one master seed, so a synthesis run is
//! reproducible byte-for-byte regardless of worker count.
//!
//! Each capability has a runnable demo under `examples/`:
//!
//! ```text
//! cargo run --example segment_otsu        # gray image -> threshold + mask
//! cargo run --example dice_score          # mask overlap score
//! cargo run --example weak_losses         # box-supervised mask losses
//! cargo run --example extract_cutouts     # (image, mask) -> RGBA cutout
//! cargo run --example transform_cutout    # flip / scale / rotate / warp
//! cargo run --example synthesize_dataset  # full catalog -> dataset run
//! cargo run --example dataset_stats       # per-class tallies of a dataset
//! cargo run --example mixup_blend         # convex image/label mixing
//! cargo run --example evaluate_detections # IoU matching, PR curves, mAP
//! ```
//!
//! The `sria` binary wraps the same operations as subcommands (`segment`,
//! `dice`, `extract`, `synth`, `stats`, `mixup`, `eval`).

pub mod bbox;
pub mod catalog;
pub mod cli;
pub mod compositor;
pub mod dataset_io;
pub mod error;
pub mod evaluator;
pub mod mask_lab;
pub mod raster;
pub mod scheduler;
pub mod seed;
pub mod transforms;

pub use error::{Error, Result};
