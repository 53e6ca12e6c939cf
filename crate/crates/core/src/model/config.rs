use crate::error::{Error, Result};
use crate::spectrum::Peak;

/// Latent assignment of theoretical peaks to the observed peaks they
/// emitted. `map[i] = Some(j)` when theoretical peak `i` emitted observed
/// peak `j`; `None` when it emitted nothing. Observed peaks not in the image
/// are noise.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct EmissionConfiguration {
    map: Vec<Option<usize>>,
}

impl EmissionConfiguration {
    /// Nothing emitted.
    pub fn empty(n: usize) -> Self {
        Self { map: vec![None; n] }
    }

    pub fn from_map(map: Vec<Option<usize>>) -> Self {
        Self { map }
    }

    /// Builds from `(theoretical, observed)` pairs; later pairs overwrite
    /// earlier ones for the same theoretical index.
    pub fn from_pairs(n: usize, pairs: impl IntoIterator<Item = (usize, usize)>) -> Self {
        let mut map = vec![None; n];
        for (t, o) in pairs {
            map[t] = Some(o);
        }
        Self { map }
    }

    pub fn map(&self) -> &[Option<usize>] {
        &self.map
    }

    pub fn len(&self) -> usize {
        self.map.len()
    }

    pub fn is_empty(&self) -> bool {
        self.map.is_empty()
    }

    pub fn get(&self, t: usize) -> Option<usize> {
        self.map[t]
    }

    pub fn set(&mut self, t: usize, o: Option<usize>) {
        self.map[t] = o;
    }

    /// Number of emitting theoretical peaks, `k`.
    pub fn emitted_count(&self) -> usize {
        self.map.iter().filter(|e| e.is_some()).count()
    }

    /// `(theoretical, observed)` pairs in theoretical order.
    pub fn pairs(&self) -> impl Iterator<Item = (usize, usize)> + '_ {
        self.map.iter().enumerate().filter_map(|(t, o)| o.map(|o| (t, o)))
    }

    /// Inverse map over `m` observed peaks: the emitting theoretical index
    /// for each observed peak, `None` for noise.
    pub fn observed_map(&self, m: usize) -> Vec<Option<usize>> {
        let mut inv = vec![None; m];
        for (t, o) in self.pairs() {
            inv[o] = Some(t);
        }
        inv
    }

    /// Emission indicator per theoretical peak.
    pub fn theoretical_indicators(&self) -> Vec<bool> {
        self.map.iter().map(Option::is_some).collect()
    }

    /// Checks length, index range, injectivity and the `|dx| <= w` window.
    pub fn validate(&self, theoretical: &[Peak], observed: &[Peak], w: f64) -> Result<()> {
        if self.map.len() != theoretical.len() {
            return Err(Error::InfeasibleConfiguration(format!(
                "configuration covers {} theoretical peaks, spectrum has {}",
                self.map.len(),
                theoretical.len()
            )));
        }
        let mut used = vec![false; observed.len()];
        for (t, o) in self.pairs() {
            if o >= observed.len() {
                return Err(Error::InfeasibleConfiguration(format!(
                    "observed index {o} out of range ({} peaks)",
                    observed.len()
                )));
            }
            if used[o] {
                return Err(Error::InfeasibleConfiguration(format!(
                    "observed peak {o} emitted twice"
                )));
            }
            used[o] = true;
            let d = (observed[o].mz - theoretical[t].mz).abs();
            if d > w {
                return Err(Error::InfeasibleConfiguration(format!(
                    "theoretical peak {t} -> observed peak {o} is {d} Da apart, window is {w}"
                )));
            }
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn validation_cases() {
        let t = [Peak::new(100.0, 1.0), Peak::new(200.0, 1.0)];
        let o = [Peak::new(100.5, 1.0), Peak::new(201.0, 1.0), Peak::new(300.0, 1.0)];
        let ok = EmissionConfiguration::from_pairs(2, [(0, 0), (1, 1)]);
        assert!(ok.validate(&t, &o, 2.0).is_ok());
        assert_eq!(ok.emitted_count(), 2);
        assert_eq!(ok.observed_map(3), vec![Some(0), Some(1), None]);

        let far = EmissionConfiguration::from_pairs(2, [(0, 2)]);
        assert!(far.validate(&t, &o, 2.0).is_err());
        let twice = EmissionConfiguration::from_map(vec![Some(0), Some(0)]);
        assert!(twice.validate(&t, &o, 500.0).is_err());
        let short = EmissionConfiguration::empty(1);
        assert!(short.validate(&t, &o, 2.0).is_err());
        let range = EmissionConfiguration::from_map(vec![Some(7), None]);
        assert!(range.validate(&t, &o, 2.0).is_err());
    }
}
