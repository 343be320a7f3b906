use morigeo_core::labeling::instance_boundaries;
use morigeo_core::morphology::StructuringElement;
use morigeo_core::targets::{
    boundary_band, gen_targets, normalized_distance_field, reparameterize, BoundaryConfig, DistanceConfig,
};
use morigeo_core::{GridShape, InstanceGrid};
use proptest::prelude::*;

/// Random instance grids: each pixel draws a raw label in 0..4, then ids
/// are renumbered. Instances need not be connected.
fn instance_grid(max: usize) -> impl Strategy<Value = InstanceGrid> {
    (1..max, 1..max).prop_flat_map(|(h, w)| {
        proptest::collection::vec(0u32..4, h * w)
            .prop_map(move |raw| InstanceGrid::relabel(GridShape::new(h, w).unwrap(), &raw).unwrap())
    })
}

fn se() -> impl Strategy<Value = StructuringElement> {
    prop_oneof![Just(StructuringElement::Square), Just(StructuringElement::Diamond)]
}

/// Pads `inst` by `(top, left)` pixels inside a grid grown by `extra`.
fn translate(inst: &InstanceGrid, top: usize, left: usize, extra: usize) -> InstanceGrid {
    let s = inst.shape();
    let big = GridShape::new(s.height + extra, s.width + extra).unwrap();
    let mut ids = vec![0u16; big.len()];
    for r in 0..s.height {
        for c in 0..s.width {
            ids[big.index(r + top, c + left)] = inst.get(r, c);
        }
    }
    InstanceGrid::from_vec(big, ids).unwrap()
}

proptest! {
    #[test]
    fn distance_is_zero_on_boundary_and_below_one(inst in instance_grid(16)) {
        let d = normalized_distance_field(&inst, &DistanceConfig::default()).unwrap();
        let bnd = instance_boundaries(&inst);
        for i in 0..inst.shape().len() {
            let v = d.as_slice()[i];
            prop_assert!((0.0..1.0).contains(&v));
            if inst.as_slice()[i] == 0 || bnd.as_slice()[i] {
                prop_assert_eq!(v, 0.0);
            } else {
                prop_assert!(v > 0.0);
            }
        }
    }

    #[test]
    fn reparameterization_stays_below_the_diagonal(x in 0.0f64..=1.0, alpha in 0.01f64..20.0) {
        let y = reparameterize(x, alpha);
        prop_assert!(y <= x + 1e-15);
        prop_assert!(y >= 0.0);
        let y2 = reparameterize((x + 1e-3).min(1.0), alpha);
        prop_assert!(y2 >= y);
    }

    #[test]
    fn band_is_binary_and_grows_with_width(inst in instance_grid(16), se in se()) {
        let bnd = instance_boundaries(&inst);
        let mut prev: Option<Vec<f64>> = None;
        for w in 1..=4 {
            let band = boundary_band(&inst, &BoundaryConfig { band_half_width: w, se_shape: se }).unwrap();
            let b = band.as_slice();
            prop_assert!(b.iter().all(|&v| v == 0.0 || v == 1.0));
            for i in 0..b.len() {
                if bnd.as_slice()[i] {
                    prop_assert_eq!(b[i], 1.0);
                }
                if let Some(p) = &prev {
                    prop_assert!(p[i] <= b[i]);
                }
            }
            prev = Some(b.to_vec());
        }
    }

    #[test]
    fn targets_translate_with_the_instances(
        inst in instance_grid(10),
        top in 0usize..4,
        left in 0usize..4,
        w in 1usize..3,
        se in se(),
    ) {
        // the padding must exceed the band half-width so nothing is clipped
        let extra = 8;
        let (top, left) = (top + w + 1, left + w + 1);
        let dc = DistanceConfig::default();
        let bc = BoundaryConfig { band_half_width: w, se_shape: se };
        let a = gen_targets(&translate(&inst, w + 1, w + 1, extra), &dc, &bc).unwrap();
        let b = gen_targets(&translate(&inst, top, left, extra), &dc, &bc).unwrap();
        let s = inst.shape();
        let big = GridShape::new(s.height + extra, s.width + extra).unwrap();
        let (dr, dc_) = (top - (w + 1), left - (w + 1));
        for r in 0..big.height {
            for c in 0..big.width {
                let (r2, c2) = (r + dr, c + dc_);
                if r2 < big.height && c2 < big.width {
                    prop_assert_eq!(a.distance.get(r, c), b.distance.get(r2, c2));
                    prop_assert_eq!(a.boundary.get(r, c), b.boundary.get(r2, c2));
                }
            }
        }
    }
}

#[test]
fn single_block_profile() {
    // 5x5 block in a 7x7 grid: distances to the inner boundary ring are
    // 0 on the ring, 1 on the next ring and 2 at the center.
    let shape = GridShape::new(7, 7).unwrap();
    let mut ids = vec![0u16; shape.len()];
    for r in 1..6 {
        for c in 1..6 {
            ids[shape.index(r, c)] = 1;
        }
    }
    let inst = InstanceGrid::from_vec(shape, ids).unwrap();
    let cfg = DistanceConfig::default();
    let d = normalized_distance_field(&inst, &cfg).unwrap();
    assert_eq!(d.get(3, 3), 2.0 / (2.0 + cfg.epsilon));
    assert_eq!(d.get(2, 3), 1.0 / (2.0 + cfg.epsilon));
    assert_eq!(d.get(1, 1), 0.0);
}
