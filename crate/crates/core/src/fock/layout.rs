//! Ordered mode layouts: named optical modes with a global photon cutoff.

use std::fmt;

use serde::{Deserialize, Serialize};

use crate::error::{SimError, SimResult};

/// Polarization of an optical mode.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub enum Polarization {
    H,
    V,
}

impl fmt::Display for Polarization {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Polarization::H => write!(f, "H"),
            Polarization::V => write!(f, "V"),
        }
    }
}

/// Index of a mode within a [`ModeLayout`].
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct ModeIndex(pub(crate) usize);

impl ModeIndex {
    /// Position of the mode in the layout's ordering.
    pub fn index(self) -> usize {
        self.0
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub(crate) struct ModeId {
    pub spatial: String,
    pub pol: Polarization,
}

/// An ordered collection of optical modes plus the global total-photon cutoff.
///
/// Mode identifiers (spatial label, polarization) are unique. A spatial label
/// carries exactly the polarizations declared for it: dual-rail polarization
/// qubits declare H and V, a herald arm may declare a single polarization.
#[derive(Clone, Debug, PartialEq)]
pub struct ModeLayout {
    modes: Vec<ModeId>,
    cutoff: u32,
}

impl ModeLayout {
    /// Builds a layout from explicit (spatial, polarization) pairs.
    pub fn new<S: Into<String>>(modes: Vec<(S, Polarization)>, cutoff: u32) -> SimResult<Self> {
        let modes: Vec<ModeId> = modes
            .into_iter()
            .map(|(s, p)| ModeId { spatial: s.into(), pol: p })
            .collect();
        if cutoff == 0 {
            return Err(SimError::InvalidLayout("cutoff must be at least 1".into()));
        }
        for m in &modes {
            if m.spatial.is_empty() {
                return Err(SimError::InvalidLayout("empty spatial label".into()));
            }
        }
        for (i, a) in modes.iter().enumerate() {
            for b in modes.iter().skip(i + 1) {
                if a == b {
                    return Err(SimError::InvalidLayout(format!(
                        "duplicate mode {}_{}",
                        a.spatial, a.pol
                    )));
                }
            }
        }
        Ok(ModeLayout { modes, cutoff })
    }

    /// Starts a builder for mixed dual-rail / single-polarization layouts.
    pub fn builder() -> LayoutBuilder {
        LayoutBuilder { modes: Vec::new() }
    }

    /// Number of modes.
    pub fn len(&self) -> usize {
        self.modes.len()
    }

    /// True when the layout holds no modes.
    pub fn is_empty(&self) -> bool {
        self.modes.is_empty()
    }

    /// Global total-photon cutoff.
    pub fn cutoff(&self) -> u32 {
        self.cutoff
    }

    /// Looks up the index of a mode.
    pub fn mode(&self, spatial: &str, pol: Polarization) -> SimResult<ModeIndex> {
        self.modes
            .iter()
            .position(|m| m.spatial == spatial && m.pol == pol)
            .map(ModeIndex)
            .ok_or_else(|| SimError::UnknownMode(format!("{spatial}_{pol}")))
    }

    /// All mode indices belonging to a spatial label, in layout order.
    pub fn spatial_modes(&self, spatial: &str) -> Vec<ModeIndex> {
        self.modes
            .iter()
            .enumerate()
            .filter(|(_, m)| m.spatial == spatial)
            .map(|(i, _)| ModeIndex(i))
            .collect()
    }

    /// Human-readable name of a mode, e.g. `in_H`.
    pub fn mode_name(&self, idx: ModeIndex) -> String {
        let m = &self.modes[idx.0];
        format!("{}_{}", m.spatial, m.pol)
    }

    /// (spatial label, polarization) of a mode.
    pub fn mode_id(&self, idx: ModeIndex) -> (&str, Polarization) {
        let m = &self.modes[idx.0];
        (&m.spatial, m.pol)
    }

    /// Indices not contained in `subset`, in layout order.
    pub fn complement(&self, subset: &[ModeIndex]) -> Vec<ModeIndex> {
        (0..self.modes.len())
            .map(ModeIndex)
            .filter(|i| !subset.contains(i))
            .collect()
    }

    /// A layout containing only `keep` (in the given order), same cutoff.
    pub fn sublayout(&self, keep: &[ModeIndex]) -> ModeLayout {
        ModeLayout {
            modes: keep.iter().map(|&i| self.modes[i.0].clone()).collect(),
            cutoff: self.cutoff,
        }
    }

    /// Concatenation of two layouts with disjoint spatial labels.
    pub fn join(&self, other: &ModeLayout) -> SimResult<ModeLayout> {
        for m in &other.modes {
            if self.modes.iter().any(|x| x.spatial == m.spatial) {
                return Err(SimError::LabelCollision(m.spatial.clone()));
            }
        }
        let mut modes = self.modes.clone();
        modes.extend(other.modes.iter().cloned());
        Ok(ModeLayout { modes, cutoff: self.cutoff.max(other.cutoff) })
    }

    /// Iterator over all indices.
    pub fn indices(&self) -> impl Iterator<Item = ModeIndex> {
        (0..self.modes.len()).map(ModeIndex)
    }
}

/// Builder for [`ModeLayout`].
pub struct LayoutBuilder {
    modes: Vec<(String, Polarization)>,
}

impl LayoutBuilder {
    /// Adds a dual-rail spatial label (H then V).
    pub fn dual_rail(mut self, spatial: &str) -> Self {
        self.modes.push((spatial.to_string(), Polarization::H));
        self.modes.push((spatial.to_string(), Polarization::V));
        self
    }

    /// Adds a single-polarization mode.
    pub fn single(mut self, spatial: &str, pol: Polarization) -> Self {
        self.modes.push((spatial.to_string(), pol));
        self
    }

    /// Finalizes the layout with the given total-photon cutoff.
    pub fn build(self, cutoff: u32) -> SimResult<ModeLayout> {
        ModeLayout::new(self.modes, cutoff)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn duplicate_modes_rejected() {
        let r = ModeLayout::new(vec![("a", Polarization::H), ("a", Polarization::H)], 4);
        assert!(matches!(r, Err(SimError::InvalidLayout(_))));
    }

    #[test]
    fn builder_and_lookup() {
        let layout = ModeLayout::builder()
            .dual_rail("in")
            .single("idler", Polarization::H)
            .build(8)
            .unwrap();
        assert_eq!(layout.len(), 3);
        assert_eq!(layout.mode("in", Polarization::V).unwrap().index(), 1);
        assert_eq!(layout.mode_name(ModeIndex(2)), "idler_H");
        assert!(layout.mode("idler", Polarization::V).is_err());
    }

    #[test]
    fn join_rejects_label_collision() {
        let a = ModeLayout::builder().dual_rail("x").build(4).unwrap();
        let b = ModeLayout::builder().dual_rail("x").build(4).unwrap();
        assert!(matches!(a.join(&b), Err(SimError::LabelCollision(_))));
    }

    #[test]
    fn sublayout_preserves_order() {
        let layout = ModeLayout::builder().dual_rail("a").dual_rail("b").build(6).unwrap();
        let keep = vec![ModeIndex(2), ModeIndex(3)];
        let sub = layout.sublayout(&keep);
        assert_eq!(sub.mode_name(ModeIndex(0)), "b_H");
        assert_eq!(sub.cutoff(), 6);
    }
}
