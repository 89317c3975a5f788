use proptest::prelude::*;
use rissac_core::sac::ReplayMemory;

proptest! {
    #[test]
    fn keeps_the_most_recent_transitions_in_order(cap in 1usize..20, pushes in 0usize..60) {
        let mut m = ReplayMemory::new(cap, 1, 1);
        for i in 0..pushes {
            m.push(&[i as f64], &[0.0], i as f64, &[0.0]).unwrap();
        }
        prop_assert_eq!(m.len(), pushes.min(cap));
        let first = pushes.saturating_sub(cap);
        for age in 0..m.len() {
            prop_assert_eq!(m.get(age).unwrap().reward, (first + age) as f64);
        }
        prop_assert!(m.get(m.len()).is_none());
    }
}
