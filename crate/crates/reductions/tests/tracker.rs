use designforge_reductions::{Case, DeficiencyTracker, TrackerError};
use proptest::prelude::*;

/// Even deficiencies summing to zero: random halves moved between pairs.
fn balanced_def() -> impl Strategy<Value = Vec<i64>> {
    (2usize..24).prop_flat_map(|len| {
        prop::collection::vec((0..len, 0..len, 0i64..4), 0..40).prop_map(move |moves| {
            let mut d = vec![0i64; len];
            for (a, b, x) in moves {
                d[a] += 2 * x;
                d[b] -= 2 * x;
            }
            d
        })
    })
}

fn norm(w: &[i64]) -> i64 {
    w.iter().map(|x| x.abs()).sum()
}

#[test]
fn rejects_odd_and_unbalanced() {
    assert_eq!(
        DeficiencyTracker::new(&[2, -1, -1]).unwrap_err(),
        TrackerError::OddDeficiency { index: 1, value: -1 }
    );
    assert_eq!(
        DeficiencyTracker::new(&[2, 2, -2]).unwrap_err(),
        TrackerError::Unbalanced(2)
    );
}

#[test]
fn halves_the_deficiency() {
    let t = DeficiencyTracker::new(&[4, -2, -2, 0]).unwrap();
    assert_eq!(t.w, vec![2, -1, -1, 0]);
    assert_eq!(t.norm(), 4);
}

#[test]
fn zero_tracker_uses_case_three() {
    let t = DeficiencyTracker::new(&[0; 5]).unwrap();
    let c = t.choose(3).unwrap();
    assert_eq!(c.case, Case::Three);
    assert_eq!(c.c, c.c_prime);
    assert_eq!(c.c, vec![0, 1, 2]);
}

#[test]
fn class_larger_than_part_is_an_error() {
    let t = DeficiencyTracker::new(&[0; 3]).unwrap();
    assert_eq!(
        t.choose(4).unwrap_err(),
        TrackerError::ClassTooLarge { h: 4, size: 3 }
    );
}

#[test]
fn choose_by_prefers_small_keys() {
    let t = DeficiencyTracker::new(&[2, 2, -2, -2]).unwrap();
    let c = t.choose_by(1, |u| std::cmp::Reverse(u)).unwrap();
    assert_eq!(c.case, Case::One);
    assert_eq!((c.c, c.c_prime), (vec![1], vec![3]));
}

proptest! {
    #[test]
    fn laws_hold_along_any_run(def in balanced_def(), hs in prop::collection::vec(1usize..6, 1..40)) {
        let mut t = DeficiencyTracker::new(&def).unwrap();
        for h in hs {
            let h = h.min(t.w.len());
            let before = t.w.clone();
            let Ok(choice) = t.choose(h) else { continue };
            prop_assert_eq!(choice.c.len(), h);
            prop_assert_eq!(choice.c_prime.len(), h);
            t.apply(&choice);
            prop_assert_eq!(t.sum(), 0);
            let (nb, na) = (norm(&before), norm(&t.w));
            prop_assert!(na <= nb);
            match choice.case {
                Case::One => prop_assert_eq!(na, nb - 2 * h as i64),
                Case::Two => prop_assert!(na < nb),
                Case::Three => prop_assert_eq!(na, nb),
            }
        }
        prop_assert!(t.laws_hold());
    }

    #[test]
    fn choice_sets_follow_signs(def in balanced_def(), h in 1usize..6) {
        let t = DeficiencyTracker::new(&def).unwrap();
        let h = h.min(t.w.len());
        if let Ok(c) = t.choose(h) {
            match c.case {
                Case::One => {
                    prop_assert!(c.c.iter().all(|&u| t.w[u] > 0));
                    prop_assert!(c.c_prime.iter().all(|&u| t.w[u] < 0));
                }
                Case::Three => prop_assert!(t.w.iter().all(|&x| x == 0)),
                Case::Two => {
                    // Moved centres carry opposite signs; shared ones sit in both.
                    let only_c: Vec<_> = c.c.iter().filter(|u| !c.c_prime.contains(u)).collect();
                    let only_p: Vec<_> = c.c_prime.iter().filter(|u| !c.c.contains(u)).collect();
                    prop_assert_eq!(only_c.len(), only_p.len());
                    prop_assert!(only_c.iter().all(|&&u| t.w[u] > 0));
                    prop_assert!(only_p.iter().all(|&&u| t.w[u] < 0));
                }
            }
        }
    }

    #[test]
    fn repeated_full_classes_reach_zero(def in balanced_def()) {
        let mut t = DeficiencyTracker::new(&def).unwrap();
        let h = 1;
        let start = t.norm();
        for _ in 0..=start {
            if t.norm() == 0 {
                break;
            }
            let c = t.choose(h).unwrap();
            t.apply(&c);
        }
        prop_assert_eq!(t.norm(), 0);
    }
}
