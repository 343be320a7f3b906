use std::collections::{BTreeSet, HashMap};

use morigeo_core::eval::{map_report, EvalImage, EvalParams};
use morigeo_core::labeling::connected_components;
use morigeo_core::split::{split, zhang_suen, SplitConfig, SplitMethod};
use morigeo_core::synth::{synth, ShapeKind, SynthConfig};
use morigeo_core::targets::gen_targets;
use morigeo_core::{Connectivity, GridShape, InstanceGrid, LabelGrid, Mask, ScalarField};
use proptest::prelude::*;

const METHODS: [SplitMethod; 4] = [
    SplitMethod::Watershed,
    SplitMethod::Skeleton,
    SplitMethod::Morphology,
    SplitMethod::Geometry,
];

fn run(method: SplitMethod, sem: &LabelGrid, fields: (&ScalarField, &ScalarField), cfg: &SplitConfig) -> InstanceGrid {
    split(method, sem, 1, Some(fields), cfg).unwrap()
}

/// Every class-1 pixel gets exactly one id, nothing else does, and each
/// output instance sits inside one input component.
fn check_partition(sem: &LabelGrid, out: &InstanceGrid, conn: Connectivity) {
    let comps = connected_components(sem, 1, conn).unwrap();
    let mut parent: HashMap<u16, BTreeSet<u16>> = HashMap::new();
    for ((&s, &o), &c) in sem.as_slice().iter().zip(out.as_slice()).zip(comps.as_slice()) {
        assert_eq!(s == 1, o != 0);
        if o != 0 {
            parent.entry(o).or_default().insert(c);
        }
    }
    assert_eq!(parent.len(), out.num_instances());
    assert!(parent.values().all(|p| p.len() == 1));
}

fn random_case() -> impl Strategy<Value = (LabelGrid, ScalarField, ScalarField)> {
    (1usize..20, 1usize..20).prop_flat_map(|(h, w)| {
        let n = h * w;
        (
            proptest::collection::vec(prop_oneof![2 => Just(0u16), 5 => Just(1u16), 1 => Just(2u16)], n),
            proptest::collection::vec(0.0f64..1.0, n),
            proptest::collection::vec(any::<bool>(), n),
        )
            .prop_map(move |(l, d, b)| {
                let shape = GridShape::new(h, w).unwrap();
                (
                    LabelGrid::from_vec(shape, l).unwrap(),
                    ScalarField::from_vec(shape, d).unwrap(),
                    ScalarField::from_vec(shape, b.iter().map(|&x| x as u8 as f64).collect()).unwrap(),
                )
            })
    })
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn splitters_partition_and_refine((sem, dist, bnd) in random_case(), four in any::<bool>()) {
        let conn = if four { Connectivity::Four } else { Connectivity::Eight };
        let cfg = SplitConfig {
            connectivity: conn,
            min_seed_area: 1,
            min_instance_area: 3,
            opening_radius: 1,
            ..Default::default()
        };
        for m in METHODS {
            let out = run(m, &sem, (&dist, &bnd), &cfg);
            check_partition(&sem, &out, conn);
        }
    }
}

fn scenes(cfg: SynthConfig) -> Vec<(LabelGrid, InstanceGrid, ScalarField, ScalarField)> {
    synth(&cfg)
        .unwrap()
        .into_iter()
        .map(|s| {
            let t = gen_targets(&s.instances, &Default::default(), &Default::default()).unwrap();
            (s.semantic, s.instances, t.distance, t.boundary)
        })
        .collect()
}

#[test]
fn splitters_partition_synthetic_scenes() {
    let cfg = SynthConfig {
        num_scenes: 30,
        shapes: ShapeKind::Mixed,
        touch_probability: 0.7,
        rng_seed: 11,
        ..Default::default()
    };
    let split_cfg = SplitConfig::default();
    for (sem, _, d, b) in scenes(cfg) {
        for m in METHODS {
            let out = run(m, &sem, (&d, &b), &split_cfg);
            check_partition(&sem, &out, split_cfg.connectivity);
            assert_eq!(out, run(m, &sem, (&d, &b), &split_cfg), "{m:?} is not deterministic");
        }
    }
}

#[test]
fn isolated_discs_come_back_as_components() {
    let cfg = SynthConfig {
        num_scenes: 30,
        shapes: ShapeKind::Disc,
        touch_probability: 0.0,
        rng_seed: 5,
        ..Default::default()
    };
    let split_cfg = SplitConfig::default();
    for (sem, gt, d, b) in scenes(cfg) {
        let cc = connected_components(&sem, 1, Connectivity::Eight).unwrap();
        assert_eq!(cc, gt);
        for m in METHODS {
            assert_eq!(run(m, &sem, (&d, &b), &split_cfg), cc, "{m:?}");
        }
    }
}

fn ap50(pred: &InstanceGrid, gt: &InstanceGrid) -> f64 {
    let none = HashMap::new();
    let img = EvalImage::from_grids(pred, &HashMap::new(), &none, gt, &none, 1).unwrap();
    let report = map_report(&[img], &[(1, "fg".into())], &EvalParams::default()).unwrap();
    report.average.ap50.unwrap()
}

#[test]
fn geometry_beats_components_on_every_touching_scene() {
    let cfg = SynthConfig {
        num_scenes: 100,
        touch_probability: 0.7,
        rng_seed: 7,
        ..Default::default()
    };
    let mut touching = 0;
    for (sem, gt, d, b) in scenes(cfg) {
        let cc = connected_components(&sem, 1, Connectivity::Eight).unwrap();
        if cc.num_instances() == gt.num_instances() {
            continue;
        }
        touching += 1;
        let geo = split(SplitMethod::Geometry, &sem, 1, Some((&d, &b)), &SplitConfig::default()).unwrap();
        assert!(ap50(&geo, &gt) > ap50(&cc, &gt));
    }
    assert!(touching > 50);
}

/// Textbook two-subiteration thinning on a zero-padded copy, written
/// independently of the library version.
fn thin_oracle(mask: &Mask) -> Mask {
    let s = mask.shape();
    let (h, w) = (s.height + 2, s.width + 2);
    let mut img = vec![vec![0u8; w]; h];
    for (r, c) in mask.pixels() {
        img[r + 1][c + 1] = 1;
    }
    loop {
        let mut changed = false;
        for step in 0..2 {
            let mut kill = Vec::new();
            for r in 1..h - 1 {
                for c in 1..w - 1 {
                    if img[r][c] == 0 {
                        continue;
                    }
                    let p = [
                        img[r - 1][c],
                        img[r - 1][c + 1],
                        img[r][c + 1],
                        img[r + 1][c + 1],
                        img[r + 1][c],
                        img[r + 1][c - 1],
                        img[r][c - 1],
                        img[r - 1][c - 1],
                    ];
                    let b: u8 = p.iter().sum();
                    let a = (0..8).filter(|&k| p[k] == 0 && p[(k + 1) % 8] == 1).count();
                    let (p2, p4, p6, p8) = (p[0], p[2], p[4], p[6]);
                    let cond = if step == 0 {
                        p2 * p4 * p6 == 0 && p4 * p6 * p8 == 0
                    } else {
                        p2 * p4 * p8 == 0 && p2 * p6 * p8 == 0
                    };
                    if (2..=6).contains(&b) && a == 1 && cond {
                        kill.push((r, c));
                    }
                }
            }
            changed |= !kill.is_empty();
            for (r, c) in kill {
                img[r][c] = 0;
            }
        }
        if !changed {
            break;
        }
    }
    let px: Vec<(usize, usize)> = (0..s.height)
        .flat_map(|r| (0..s.width).map(move |c| (r, c)))
        .filter(|&(r, c)| img[r + 1][c + 1] == 1)
        .collect();
    Mask::from_pixels(s, &px).unwrap()
}

proptest! {
    #[test]
    fn thinning_matches_reference(h in 1usize..16, w in 1usize..16, bits in proptest::collection::vec(prop::bool::weighted(0.7), 256)) {
        let shape = GridShape::new(h, w).unwrap();
        let mask = Mask::from_vec(shape, bits[..h * w].to_vec()).unwrap();
        let skel = zhang_suen(&mask);
        prop_assert_eq!(&skel, &thin_oracle(&mask));
        prop_assert!(skel.is_subset_of(&mask));
    }
}

#[test]
fn thick_plus_thins_to_a_cross() {
    let shape = GridShape::new(21, 21).unwrap();
    let mut px = Vec::new();
    for r in 0..21 {
        for c in 0..21 {
            if (8..=12).contains(&r) && (2..=18).contains(&c) || (8..=12).contains(&c) && (2..=18).contains(&r) {
                px.push((r, c));
            }
        }
    }
    let mask = Mask::from_pixels(shape, &px).unwrap();
    let skel = zhang_suen(&mask);
    assert_eq!(skel, thin_oracle(&mask));
    // one skeleton piece entering all four arms
    let (_, n) = morigeo_core::labeling::label_mask(&skel, Connectivity::Eight);
    assert_eq!(n, 1);
    assert!(skel.pixels().any(|(r, _)| r < 8));
    assert!(skel.pixels().any(|(r, _)| r > 12));
    assert!(skel.pixels().any(|(_, c)| c < 8));
    assert!(skel.pixels().any(|(_, c)| c > 12));
}
