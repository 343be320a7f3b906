use morigeo_core::labeling::{connected_components, instance_boundaries, label_mask, merge_to_semantic};
use morigeo_core::{Connectivity, GridShape, InstanceGrid, LabelGrid, Mask};
use proptest::prelude::*;

fn label_grid() -> impl Strategy<Value = LabelGrid> {
    (1usize..14, 1usize..14).prop_flat_map(|(h, w)| {
        proptest::collection::vec(prop_oneof![3 => Just(0u16), 4 => Just(1u16), 1 => Just(2u16)], h * w)
            .prop_map(move |v| LabelGrid::from_vec(GridShape::new(h, w).unwrap(), v).unwrap())
    })
}

fn conn() -> impl Strategy<Value = Connectivity> {
    prop_oneof![Just(Connectivity::Four), Just(Connectivity::Eight)]
}

proptest! {
    #[test]
    fn relabeling_output_is_idempotent(sem in label_grid(), conn in conn()) {
        let first = connected_components(&sem, 1, conn).unwrap();
        let again = connected_components(&merge_to_semantic(&first, 1), 1, conn).unwrap();
        prop_assert_eq!(first.foreground(), again.foreground());
        prop_assert_eq!(first.num_instances(), again.num_instances());
        prop_assert_eq!(&first, &again);
    }

    #[test]
    fn four_never_finds_fewer_components(sem in label_grid()) {
        let four = connected_components(&sem, 1, Connectivity::Four).unwrap();
        let eight = connected_components(&sem, 1, Connectivity::Eight).unwrap();
        prop_assert!(four.num_instances() >= eight.num_instances());
    }

    #[test]
    fn boundaries_lie_in_the_foreground(sem in label_grid(), conn in conn()) {
        let inst = connected_components(&sem, 1, conn).unwrap();
        let bnd = instance_boundaries(&inst);
        prop_assert!(bnd.is_subset_of(&inst.foreground()));
        for (id, &area) in inst.areas().iter().enumerate().skip(1) {
            if area == 1 {
                let m = inst.instance_mask(id as u16).unwrap();
                prop_assert!(m.is_subset_of(&bnd));
            }
        }
    }

    #[test]
    fn components_are_connected_and_maximal(sem in label_grid(), conn in conn()) {
        let inst = connected_components(&sem, 1, conn).unwrap();
        let shape = inst.shape();
        let ids = inst.as_slice();
        // neighbors of the same class always share an id
        for i in 0..shape.len() {
            for &(dr, dc) in conn.offsets() {
                if let Some(j) = shape.offset(i, dr, dc) {
                    if sem.as_slice()[i] == 1 && sem.as_slice()[j] == 1 {
                        prop_assert_eq!(ids[i], ids[j]);
                    }
                }
            }
        }
        // and each id is a single component of its own mask
        for id in 1..=inst.num_instances() as u16 {
            let (_, n) = label_mask(&inst.instance_mask(id).unwrap(), conn);
            prop_assert_eq!(n, 1);
        }
    }
}

#[test]
fn repeated_runs_are_identical() {
    let shape = GridShape::new(40, 40).unwrap();
    let labels: Vec<u16> = (0..shape.len()).map(|i| ((i * 7919) % 13 < 6) as u16).collect();
    let sem = LabelGrid::from_vec(shape, labels).unwrap();
    let a = connected_components(&sem, 1, Connectivity::Eight).unwrap();
    let b = connected_components(&sem, 1, Connectivity::Eight).unwrap();
    assert_eq!(a, b);
}

#[test]
fn raster_order_ids() {
    let shape = GridShape::new(3, 5).unwrap();
    #[rustfmt::skip]
    let sem = LabelGrid::from_vec(shape, vec![
        0, 0, 0, 0, 1,
        1, 0, 1, 0, 0,
        1, 0, 0, 0, 0,
    ]).unwrap();
    let inst = connected_components(&sem, 1, Connectivity::Eight).unwrap();
    assert_eq!(inst.as_slice(), &[0, 0, 0, 0, 1, 2, 0, 3, 0, 0, 2, 0, 0, 0, 0]);
    assert_eq!(inst, InstanceGrid::from_vec(shape, inst.as_slice().to_vec()).unwrap());
    let empty = Mask::new(shape);
    assert_eq!(label_mask(&empty, Connectivity::Four).1, 0);
}
