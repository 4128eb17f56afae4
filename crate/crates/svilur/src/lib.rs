//! Grid-level on-road air pollution estimation from mobile monitoring data
//! and street-view imagery.
//!
//! The pipeline runs in stages, each usable on its own:
//!
//! 1. [`ingest`] — parse and clean taxi monitoring records, fixed-site
//!    reference series, and the road network.
//! 2. [`calibration`] — remove diurnal background drift with multiplicative
//!    adjustment factors derived from the fixed-site series.
//! 3. [`geospatial`] — local projection, 200 m grid median aggregation, and
//!    circular-buffer road sampling at 25 m arc intervals.
//! 4. [`svi_client`] — cached, rate-limited acquisition of street-view images
//!    per sample point and heading, with a fully offline mode.
//! 5. [`imaging`] — low-quality image triage (blur, exposure, color
//!    distortion) and class-ratio feature extraction from segmentation label
//!    maps.
//! 6. [`modeling`] — stepwise linear regression, random forest, gradient
//!    boosting, and a small feed-forward network, with grid search over
//!    10-fold cross-validation.
//! 7. [`metrics`] — MSE/MAE/RMSE/MAPE/R² plus improvement percentages and
//!    feature-pollutant correlations.
//! 8. [`harness`] — experiment matrix over sampling angles, buffer radii, and
//!    image-quality handling; report rendering; synthetic city generator.
//!
//! Batch stages are data-parallel via rayon when the `parallel` feature
//! (default) is enabled; outputs are identical under any worker-pool size
//! because every randomized task derives its RNG from the master seed and a
//! stable task index.

pub mod calibration;
pub mod exec;
pub mod geospatial;
pub mod harness;
pub mod imaging;
pub mod ingest;
pub mod metrics;
pub mod modeling;
pub mod pollutant;
pub mod seeding;
pub mod svi_client;

pub use pollutant::Pollutant;
