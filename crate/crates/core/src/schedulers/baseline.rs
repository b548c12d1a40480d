//! Reference policies that ignore queue state.

use rand::Rng;

/// Round-robin pointer for one-user-per-frame TDMA.
#[derive(Debug, Clone)]
pub struct TdmaCursor {
    num_users: usize,
    next: usize,
}

impl TdmaCursor {
    pub fn new(num_users: usize) -> Self {
        TdmaCursor { num_users, next: 0 }
    }

    pub fn next_user(&mut self) -> usize {
        let user = self.next;
        self.next = (self.next + 1) % self.num_users.max(1);
        user
    }
}

/// Every user, every frame.
pub fn full_sm_select(num_users: usize) -> Vec<usize> {
    (0..num_users).collect()
}

/// `min(k, num_users)` users drawn uniformly without replacement, ascending.
pub fn random_k_select<R: Rng + ?Sized>(num_users: usize, k: usize, rng: &mut R) -> Vec<usize> {
    let mut set = rand::seq::index::sample(rng, num_users, k.min(num_users)).into_vec();
    set.sort_unstable();
    set
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn tdma_cycles() {
        let mut c = TdmaCursor::new(3);
        let seq: Vec<usize> = (0..7).map(|_| c.next_user()).collect();
        assert_eq!(seq, vec![0, 1, 2, 0, 1, 2, 0]);
    }

    #[test]
    fn random_k_size() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        for _ in 0..50 {
            let s = random_k_select(40, 10, &mut rng);
            assert_eq!(s.len(), 10);
            assert!(s.windows(2).all(|w| w[0] < w[1]));
            assert!(s.iter().all(|&u| u < 40));
        }
        assert_eq!(random_k_select(4, 10, &mut rng), vec![0, 1, 2, 3]);
    }

    #[test]
    fn full_sm_is_everyone() {
        assert_eq!(full_sm_select(4), vec![0, 1, 2, 3]);
    }
}
