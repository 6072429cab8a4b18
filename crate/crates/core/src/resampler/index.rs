use std::collections::HashMap;

use crate::field::{enumerate_candidates, Field, LatticePoint, Shape};
use crate::par;

/// Sites of the observed field that share one neighborhood vector.
#[derive(Clone, Debug)]
pub struct CandidateGroup {
    /// Neighborhood vector read at every member.
    pub vector: Vec<f64>,
    /// Member anchors in raster order.
    pub members: Vec<LatticePoint>,
}

/// All anchors where a shape fits inside the observed field, grouped by
/// identical neighborhood vectors.
///
/// Sites with equal vectors receive equal weight, so drawing a group with
/// probability proportional to `count × weight` and then a member uniformly is
/// the same law as drawing sites directly, at the cost of one distance per
/// distinct vector instead of one per site. Groups are ordered by their first
/// member in raster order.
#[derive(Clone, Debug)]
pub struct CandidateIndex {
    shape: Shape,
    groups: Vec<CandidateGroup>,
    sites: usize,
}

impl CandidateIndex {
    pub fn build(observed: &Field, shape: &Shape) -> Self {
        let anchors = enumerate_candidates(observed, shape);
        let offsets = shape.offsets();
        let vectors: Vec<Vec<f64>> = par::map_range(anchors.len(), |i| {
            let s = anchors[i];
            offsets
                .iter()
                .map(|&(dr, dc)| observed.at((s.row + dr as i64) as usize, (s.col + dc as i64) as usize))
                .collect()
        });

        let mut slot: HashMap<Vec<u64>, usize> = HashMap::new();
        let mut groups: Vec<CandidateGroup> = Vec::new();
        for (anchor, vector) in anchors.iter().zip(vectors) {
            let key: Vec<u64> = vector.iter().map(|v| v.to_bits()).collect();
            match slot.get(&key) {
                Some(&g) => groups[g].members.push(*anchor),
                None => {
                    slot.insert(key, groups.len());
                    groups.push(CandidateGroup {
                        vector,
                        members: vec![*anchor],
                    });
                }
            }
        }
        CandidateIndex {
            shape: shape.clone(),
            groups,
            sites: anchors.len(),
        }
    }

    pub fn shape(&self) -> &Shape {
        &self.shape
    }

    pub fn groups(&self) -> &[CandidateGroup] {
        &self.groups
    }

    /// Number of candidate sites (not groups).
    pub fn site_count(&self) -> usize {
        self.sites
    }

    pub fn is_empty(&self) -> bool {
        self.sites == 0
    }
}
