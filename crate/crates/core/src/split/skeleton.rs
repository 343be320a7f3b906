use super::{keep_large, nearest_region, split_components, Component, SplitConfig};
use crate::error::Result;
use crate::grid::{Connectivity, InstanceGrid, LabelGrid, Mask};
use crate::labeling::label_mask;

/// Zhang-Suen thinning. Pixels on the outermost row or column are treated
/// as background neighbors, so callers should pad.
pub fn zhang_suen(mask: &Mask) -> Mask {
    let shape = mask.shape();
    let (h, w) = (shape.height, shape.width);
    let mut img: Vec<bool> = mask.as_slice().to_vec();
    let at = |img: &[bool], r: isize, c: isize| -> bool {
        r >= 0 && c >= 0 && (r as usize) < h && (c as usize) < w && img[r as usize * w + c as usize]
    };
    let mut to_clear = Vec::new();
    loop {
        let mut changed = false;
        for step in 0..2 {
            to_clear.clear();
            for r in 0..h as isize {
                for c in 0..w as isize {
                    if !at(&img, r, c) {
                        continue;
                    }
                    // P2..P9, clockwise from north
                    let p = [
                        at(&img, r - 1, c),
                        at(&img, r - 1, c + 1),
                        at(&img, r, c + 1),
                        at(&img, r + 1, c + 1),
                        at(&img, r + 1, c),
                        at(&img, r + 1, c - 1),
                        at(&img, r, c - 1),
                        at(&img, r - 1, c - 1),
                    ];
                    let b = p.iter().filter(|&&x| x).count();
                    if !(2..=6).contains(&b) {
                        continue;
                    }
                    let a = (0..8).filter(|&k| !p[k] && p[(k + 1) % 8]).count();
                    if a != 1 {
                        continue;
                    }
                    let (p2, p4, p6, p8) = (p[0], p[2], p[4], p[6]);
                    let ok = if step == 0 {
                        !(p2 && p4 && p6) && !(p4 && p6 && p8)
                    } else {
                        !(p2 && p4 && p8) && !(p2 && p6 && p8)
                    };
                    if ok {
                        to_clear.push(r as usize * w + c as usize);
                    }
                }
            }
            for &i in &to_clear {
                img[i] = false;
            }
            changed |= !to_clear.is_empty();
        }
        if !changed {
            break;
        }
    }
    Mask::from_vec(shape, img).expect("same shape")
}

/// Skeleton pixels with three or more skeleton pixels among their eight
/// neighbors.
fn junctions(skel: &Mask) -> Vec<bool> {
    let shape = skel.shape();
    let s = skel.as_slice();
    (0..shape.len())
        .map(|i| {
            s[i] && Connectivity::Eight
                .offsets()
                .iter()
                .filter(|&&(dr, dc)| shape.offset(i, dr, dc).is_some_and(|q| s[q]))
                .count()
                >= 3
        })
        .collect()
}

fn skeleton_branches(comp: &Component, min_area: usize) -> (Vec<u32>, usize) {
    let mask = Mask::from_vec(comp.shape, comp.member.clone()).expect("crop shape");
    let skel = zhang_suen(&mask);
    let junction = junctions(&skel);
    if !junction.iter().any(|&j| j) {
        return (vec![0; comp.shape.len()], 0);
    }
    let branches: Vec<bool> = skel.as_slice().iter().zip(&junction).map(|(&s, &j)| s && !j).collect();
    let branches = Mask::from_vec(comp.shape, branches).expect("crop shape");
    let (labels, count) = label_mask(&branches, Connectivity::Eight);
    keep_large(labels, count, min_area)
}

/// Thins each component, cuts the skeleton at its junctions and gives
/// every pixel to the nearest surviving branch. Branches shorter than
/// `min_seed_area` pixels are discarded as spurs.
pub fn skeleton_split(mask: &LabelGrid, class_id: u16, cfg: &SplitConfig) -> Result<InstanceGrid> {
    cfg.validate()?;
    split_components(mask, class_id, cfg.connectivity, |comp| {
        let (branches, count) = skeleton_branches(comp, cfg.min_seed_area);
        if count <= 1 {
            return Ok(comp.whole());
        }
        Ok(nearest_region(comp, &branches))
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::grid::GridShape;
    use crate::split::test_util::sem;

    fn plus() -> LabelGrid {
        let shape = GridShape::new(31, 31).unwrap();
        let mut g = LabelGrid::new(shape);
        for r in 0..31 {
            for c in 0..31 {
                let vertical = (13..=17).contains(&c) && (2..=28).contains(&r);
                let horizontal = (13..=17).contains(&r) && (2..=28).contains(&c);
                if vertical || horizontal {
                    g.set(r, c, 1);
                }
            }
        }
        g
    }

    #[test]
    fn thinning_a_bar_gives_a_line() {
        let g = sem(&[
            "..............",
            ".############.",
            ".############.",
            ".############.",
            "..............",
        ]);
        let skel = zhang_suen(&g.class_mask(1));
        assert!(skel.count() > 0);
        // one pixel thick: no 2x2 block survives
        for r in 0..4 {
            for c in 0..13 {
                assert!(!(skel.get(r, c) && skel.get(r + 1, c) && skel.get(r, c + 1) && skel.get(r + 1, c + 1)));
            }
        }
    }

    #[test]
    fn straight_bar_is_one_instance() {
        let g = sem(&[
            "....................",
            ".##################.",
            ".##################.",
            ".##################.",
            ".##################.",
            ".##################.",
            "....................",
        ]);
        let out = skeleton_split(&g, 1, &SplitConfig::default()).unwrap();
        assert_eq!(out.num_instances(), 1);
    }

    #[test]
    fn plus_splits_into_four_arms() {
        let out = skeleton_split(&plus(), 1, &SplitConfig::default()).unwrap();
        assert_eq!(out.num_instances(), 4);
        // arm tips land in different instances
        let tips = [out.get(3, 15), out.get(27, 15), out.get(15, 3), out.get(15, 27)];
        let mut sorted = tips.to_vec();
        sorted.sort_unstable();
        sorted.dedup();
        assert_eq!(sorted.len(), 4);
    }

    #[test]
    fn empty_mask() {
        let g = LabelGrid::new(GridShape::new(4, 4).unwrap());
        assert_eq!(
            skeleton_split(&g, 1, &SplitConfig::default()).unwrap().num_instances(),
            0
        );
    }
}
