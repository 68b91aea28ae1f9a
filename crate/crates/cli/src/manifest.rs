//! Provenance block embedded in every output file.

use std::path::Path;

use maghom::io::serialize_opt_f64;
use maghom::{Backend, Length};
use serde::Serialize;
use sha2::{Digest, Sha256};

#[derive(Debug, Clone, Serialize)]
pub struct InputHash {
    pub path: String,
    pub sha256: String,
}

impl InputHash {
    pub fn of(path: &Path, bytes: &[u8]) -> Self {
        InputHash { path: path.display().to_string(), sha256: hex::encode(Sha256::digest(bytes)) }
    }
}

/// Everything needed to reproduce an output byte for byte. No timestamps.
#[derive(Debug, Clone, Serialize)]
pub struct RunManifest {
    pub command: String,
    pub inputs: Vec<InputHash>,
    pub backend: Option<&'static str>,
    #[serde(serialize_with = "serialize_opt_f64")]
    pub tau: Option<f64>,
    pub l_max: Option<String>,
    pub k_max: Option<usize>,
    pub seed: Option<u64>,
    pub version: &'static str,
}

impl RunManifest {
    pub fn new(command: &str) -> Self {
        RunManifest {
            command: command.to_string(),
            inputs: Vec::new(),
            backend: None,
            tau: None,
            l_max: None,
            k_max: None,
            seed: None,
            version: env!("CARGO_PKG_VERSION"),
        }
    }

    pub fn with_backend(mut self, backend: Backend) -> Self {
        self.backend = Some(backend.name());
        self.tau = backend.tau();
        self
    }

    pub fn with_lengths(mut self, l_max: Option<&Length>, k_max: Option<usize>) -> Self {
        self.l_max = l_max.map(Length::to_text);
        self.k_max = k_max;
        self
    }
}
