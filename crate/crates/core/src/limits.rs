/// Upper bound on the number of complex amplitudes a single dense table may hold.
///
/// The default (2^26 amplitudes, 1 GiB) comfortably fits `N = 2^20` search
/// states with a data register of up to 64 dimensions.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct AmplitudeBudget(pub usize);

impl AmplitudeBudget {
    pub const DEFAULT: AmplitudeBudget = AmplitudeBudget(1 << 26);

    /// Environment variable consulted by [`AmplitudeBudget::from_env`].
    pub const ENV_VAR: &'static str = "ENTSEARCH_MAX_AMPLITUDES";

    /// Reads the budget from `ENTSEARCH_MAX_AMPLITUDES`, falling back to the default
    /// when unset or unparsable.
    pub fn from_env() -> Self {
        std::env::var(Self::ENV_VAR)
            .ok()
            .and_then(|v| v.trim().parse().ok())
            .map(AmplitudeBudget)
            .unwrap_or_default()
    }

    pub fn check(self, requested: usize) -> crate::Result<()> {
        if requested > self.0 {
            Err(crate::Error::MemoryLimit {
                requested,
                limit: self.0,
            })
        } else {
            Ok(())
        }
    }
}

impl Default for AmplitudeBudget {
    fn default() -> Self {
        Self::DEFAULT
    }
}
