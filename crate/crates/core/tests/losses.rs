use morigeo_core::losses::{bal_wmse, boundary_bce, disentangle_loss, neighbor_pairs, NeighborPairSet};
use morigeo_core::{EmbeddingField, GridShape, InstanceGrid, ScalarField};
use proptest::prelude::*;

/// Instance grid with every pixel in some instance, plus embeddings with a
/// shared direction per instance so prototypes never cancel.
fn embedding_case() -> impl Strategy<Value = (InstanceGrid, EmbeddingField, Vec<f64>)> {
    (1usize..8, 1usize..8, 2usize..6).prop_flat_map(|(h, w, dim)| {
        let n = h * w;
        (
            proptest::collection::vec(0u32..3, n),
            proptest::collection::vec(-1.0f64..1.0, 3 * dim),
            proptest::collection::vec(-0.3f64..0.3, n * dim),
            proptest::collection::vec(0.05f64..20.0, n),
        )
            .prop_map(move |(raw, dirs, noise, scales)| {
                let shape = GridShape::new(h, w).unwrap();
                let raw: Vec<u32> = raw.iter().map(|&v| v + 1).collect();
                let inst = InstanceGrid::relabel(shape, &raw).unwrap();
                let mut values = Vec::with_capacity(n * dim);
                for (i, &id) in inst.as_slice().iter().enumerate() {
                    for d in 0..dim {
                        values.push(2.0 * dirs[(id as usize - 1) * dim + d] + 0.5 + noise[i * dim + d]);
                    }
                }
                (inst, EmbeddingField::from_vec(shape, dim, values).unwrap(), scales)
            })
    })
}

/// Direct evaluation of the disentanglement value from its definition.
fn disentangle_oracle(r: &EmbeddingField, inst: &InstanceGrid, pairs: &[(u16, u16)], lambda: f64) -> f64 {
    let dim = r.dim();
    let m = inst.num_instances();
    let unit = |v: &[f64]| {
        let n = v.iter().map(|x| x * x).sum::<f64>().sqrt();
        v.iter().map(|x| x / n).collect::<Vec<f64>>()
    };
    let members = |id: u16| (0..inst.shape().len()).filter(move |&i| inst.as_slice()[i] == id);
    let protos: Vec<Vec<f64>> = (1..=m as u16)
        .map(|id| {
            let mut s = vec![0.0; dim];
            for i in members(id) {
                for (a, b) in s.iter_mut().zip(unit(r.pixel(i))) {
                    *a += b;
                }
            }
            unit(&s)
        })
        .collect();
    let dot = |a: &[f64], b: &[f64]| a.iter().zip(b).map(|(x, y)| x * y).sum::<f64>();
    let mut pull = 0.0;
    for id in 1..=m as u16 {
        let px: Vec<usize> = members(id).collect();
        let p = &protos[id as usize - 1];
        pull += px.iter().map(|&i| 1.0 - dot(&unit(r.pixel(i)), p)).sum::<f64>() / px.len() as f64;
    }
    pull /= m as f64;
    let sep = if pairs.is_empty() {
        0.0
    } else {
        pairs
            .iter()
            .map(|&(a, b)| dot(&protos[a as usize - 1], &protos[b as usize - 1]).abs())
            .sum::<f64>()
            / pairs.len() as f64
    };
    pull + lambda * sep
}

proptest! {
    #[test]
    fn disentangle_ignores_per_pixel_scale((inst, r, scales) in embedding_case(), lambda in 0.0f64..3.0) {
        let pairs = neighbor_pairs(&inst, 3.0).unwrap();
        let base = disentangle_loss(&r, &inst, &pairs, lambda).unwrap().value;
        let dim = r.dim();
        let scaled: Vec<f64> = r.as_slice().iter().enumerate().map(|(k, &v)| v * scales[k / dim]).collect();
        let scaled = EmbeddingField::from_vec(r.shape(), dim, scaled).unwrap();
        let value = disentangle_loss(&scaled, &inst, &pairs, lambda).unwrap().value;
        prop_assert!((value - base).abs() <= 1e-9, "{base} vs {value}");
    }

    #[test]
    fn disentangle_matches_direct_evaluation((inst, r, _) in embedding_case(), lambda in 0.0f64..3.0) {
        let pairs = neighbor_pairs(&inst, 2.0).unwrap();
        let value = disentangle_loss(&r, &inst, &pairs, lambda).unwrap().value;
        let oracle = disentangle_oracle(&r, &inst, &pairs.pairs, lambda);
        prop_assert!((value - oracle).abs() <= 1e-12, "{value} vs {oracle}");
        prop_assert!(value >= -1e-12 && value <= 2.0 + lambda + 1e-12);
    }

    #[test]
    fn bal_wmse_ignores_background_replication(
        fg in proptest::collection::vec((-1.0f64..2.0, 0.0f64..=1.0), 1..12),
        bg in proptest::collection::vec((-1.0f64..2.0, 0.0f64..=1.0), 1..12),
        k in 2usize..5,
    ) {
        let case = |bg_copies: usize| {
            let mut pixels: Vec<(f64, f64, u16)> = fg.iter().map(|&(p, t)| (p, t, 1)).collect();
            for _ in 0..bg_copies {
                pixels.extend(bg.iter().map(|&(p, t)| (p, t, 0)));
            }
            let shape = GridShape::new(1, pixels.len()).unwrap();
            let pred = ScalarField::from_vec(shape, pixels.iter().map(|p| p.0).collect()).unwrap();
            let target = ScalarField::from_vec(shape, pixels.iter().map(|p| p.1).collect()).unwrap();
            let inst = InstanceGrid::from_vec(shape, pixels.iter().map(|p| p.2).collect()).unwrap();
            bal_wmse(&pred, &target, &inst).unwrap().value
        };
        let once = case(1);
        let many = case(k);
        prop_assert!((once - many).abs() <= 1e-12 * once.max(1.0), "{once} vs {many}");
    }

    #[test]
    fn unit_pos_weight_is_plain_bce(
        cells in proptest::collection::vec((-6.0f64..6.0, any::<bool>()), 1..40),
    ) {
        let shape = GridShape::new(1, cells.len()).unwrap();
        let logits = ScalarField::from_vec(shape, cells.iter().map(|c| c.0).collect()).unwrap();
        let target = ScalarField::from_vec(shape, cells.iter().map(|c| c.1 as u8 as f64).collect()).unwrap();
        let value = boundary_bce(&logits, &target, Some(1.0)).unwrap().value;
        let plain = cells
            .iter()
            .map(|&(z, y)| {
                let p = 1.0 / (1.0 + (-z).exp());
                if y { -p.ln() } else { -(1.0 - p).ln() }
            })
            .sum::<f64>()
            / cells.len() as f64;
        prop_assert!((value - plain).abs() <= 1e-12, "{value} vs {plain}");
    }
}

#[test]
fn identical_prototypes_cost_one() {
    let shape = GridShape::new(2, 4).unwrap();
    let inst = InstanceGrid::from_vec(shape, vec![1, 1, 2, 2, 1, 1, 2, 2]).unwrap();
    let r = EmbeddingField::from_vec(shape, 3, [0.2, -1.0, 0.7].repeat(8)).unwrap();
    let pairs = NeighborPairSet::new(1.0, [(1, 2)]).unwrap();
    let out = disentangle_loss(&r, &inst, &pairs, 1.0).unwrap();
    assert!((out.value - 1.0).abs() <= 1e-12);
}

#[test]
fn orthogonal_prototypes_cost_nothing() {
    let shape = GridShape::new(1, 4).unwrap();
    let inst = InstanceGrid::from_vec(shape, vec![1, 1, 2, 2]).unwrap();
    let r = EmbeddingField::from_vec(shape, 2, vec![1.0, 0.0, 3.0, 0.0, 0.0, 2.0, 0.0, 0.5]).unwrap();
    let pairs = neighbor_pairs(&inst, 1.0).unwrap();
    assert_eq!(pairs.pairs, vec![(1, 2)]);
    let out = disentangle_loss(&r, &inst, &pairs, 1.0).unwrap();
    assert_eq!(out.value, 0.0);
    assert!(out.gradient.as_slice().iter().all(|&g| g == 0.0));
}
