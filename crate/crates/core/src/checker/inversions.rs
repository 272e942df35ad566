/// Pairs `i < j` with `seq[i] > seq[j]`, counted by merge sort.
pub fn count_inversions<K: Ord + Clone>(seq: &[K]) -> u64 {
    let mut buf = seq.to_vec();
    let mut scratch = buf.clone();
    sort_count(&mut buf, &mut scratch)
}

fn sort_count<K: Ord + Clone>(xs: &mut [K], scratch: &mut [K]) -> u64 {
    let n = xs.len();
    if n < 2 {
        return 0;
    }
    let mid = n / 2;
    let mut count = sort_count(&mut xs[..mid], &mut scratch[..mid]) + sort_count(&mut xs[mid..], &mut scratch[mid..]);
    let (mut i, mut j, mut k) = (0, mid, 0);
    while i < mid && j < n {
        if xs[j] < xs[i] {
            // xs[j] jumps every remaining left element
            count += (mid - i) as u64;
            scratch[k] = xs[j].clone();
            j += 1;
        } else {
            scratch[k] = xs[i].clone();
            i += 1;
        }
        k += 1;
    }
    scratch[k..k + mid - i].clone_from_slice(&xs[i..mid]);
    k += mid - i;
    scratch[k..].clone_from_slice(&xs[j..]);
    xs.clone_from_slice(&scratch[..n]);
    count
}
