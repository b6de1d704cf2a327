//! K-means topic clustering, silhouette model selection and a 2-D PCA
//! projection for plotting.

mod kmeans;
mod pca;
mod silhouette;

pub use kmeans::{kmeans_fit, kmeans_plus_plus, lloyd, ClusterModel, KMeansConfig, LloydRun};
pub use pca::{pca_project, Projection2D};
pub use silhouette::{select_k, silhouette_score, KSelection, SelectKConfig, SilhouetteReport};

pub const DEFAULT_SEED: u64 = 42;
pub const DEFAULT_N_INIT: usize = 10;
pub const DEFAULT_MAX_ITER: usize = 300;
pub const DEFAULT_SAMPLE_CAP: usize = 5000;
pub const DEFAULT_K_MIN: usize = 2;
pub const DEFAULT_K_MAX: usize = 10;
