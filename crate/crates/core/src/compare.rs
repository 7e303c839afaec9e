//! Orderings of score vectors and rank correlation between them.

/// Object ids sorted by descending score, ties by ascending id.
pub fn rank_order(scores: &[f64]) -> Vec<usize> {
    let mut order: Vec<usize> = (0..scores.len()).collect();
    order.sort_by(|&a, &b| scores[b].total_cmp(&scores[a]).then(a.cmp(&b)));
    order
}

/// 1-based rank of every object under [`rank_order`].
pub fn rank_positions(scores: &[f64]) -> Vec<usize> {
    let mut pos = vec![0; scores.len()];
    for (i, o) in rank_order(scores).into_iter().enumerate() {
        pos[o] = i + 1;
    }
    pos
}

/// Kendall's tau between two strict orderings given as rank positions.
/// Fewer than two items gives 1.0.
pub fn kendall_tau(ranks_a: &[usize], ranks_b: &[usize]) -> f64 {
    assert_eq!(ranks_a.len(), ranks_b.len(), "rankings differ in length");
    let n = ranks_a.len();
    if n < 2 {
        return 1.0;
    }
    // b-ranks listed in a-order; discordant pairs are its inversions
    let mut by_a: Vec<usize> = (0..n).collect();
    by_a.sort_by_key(|&i| ranks_a[i]);
    let mut seq: Vec<usize> = by_a.into_iter().map(|i| ranks_b[i]).collect();
    let discordant = count_inversions(&mut seq) as f64;
    let pairs = (n * (n - 1) / 2) as f64;
    1.0 - 2.0 * discordant / pairs
}

/// Number of pairs `i < j` with `v[i] > v[j]`; sorts `v` as a side effect.
pub fn count_inversions(v: &mut [usize]) -> u64 {
    let mut buf = v.to_vec();
    merge_count(v, &mut buf)
}

fn merge_count(v: &mut [usize], buf: &mut [usize]) -> u64 {
    let n = v.len();
    if n < 2 {
        return 0;
    }
    let mid = n / 2;
    let mut inv = merge_count(&mut v[..mid], &mut buf[..mid]) + merge_count(&mut v[mid..], &mut buf[mid..]);
    let (mut i, mut j, mut k) = (0, mid, 0);
    while i < mid && j < n {
        if v[i] <= v[j] {
            buf[k] = v[i];
            i += 1;
        } else {
            buf[k] = v[j];
            inv += (mid - i) as u64;
            j += 1;
        }
        k += 1;
    }
    buf[k..k + mid - i].copy_from_slice(&v[i..mid]);
    k += mid - i;
    buf[k..].copy_from_slice(&v[j..]);
    v.copy_from_slice(&buf[..n]);
    inv
}
