//! Gravitational clustering: a prototype classifier that grows a universe of
//! static, class-labelled planets from weighted samples, then predicts either
//! by tracing a test mass through the planets' field or by scoring classes
//! with planet-centered Gaussians.
//!
//! ```
//! use gravclass::{HybridSample, Universe, UniverseConfig};
//!
//! let mut universe = Universe::new(UniverseConfig::new(1.0, 0.01, 100)).unwrap();
//! universe.train_one(&HybridSample::unit(vec![0.0, 0.0], 0)).unwrap();
//! universe.train_one(&HybridSample::unit(vec![5.0, 5.0], 1)).unwrap();
//!
//! assert_eq!(universe.predict_sim(&[4.0, 4.5]).unwrap().predicted_class, 1);
//! assert_eq!(universe.predict_prob(&[0.5, 0.0]).unwrap(), 0);
//! ```

pub mod dataset;
pub mod error;
pub mod eval;
pub mod index;
pub mod persist;
pub mod prob;
pub mod sim;
pub mod train;
pub mod universe;

pub use dataset::{kfold, load_csv, split, CsvSchema, Dataset, MinMaxScaler, SplitMode, SplitSpec};
pub use error::{Error, Result};
pub use eval::{evaluate, ConfusionMatrix, EvalPlan, EvaluationReport, Modes, Scale};
pub use index::PlanetIndex;
pub use persist::{load_universe, read_universe, save_universe, write_universe};
pub use prob::ClassScore;
pub use sim::{Capture, TraceResult};
pub use train::{TrainAction, TrainOutcome};
pub use universe::{HybridSample, Metric, Planet, SigmaFn, Universe, UniverseConfig};
