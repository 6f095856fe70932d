/// Prefix-skipping embedding of `a` into `b`.
///
/// `x ⊑ w` holds when the first `x` in `w` is its last element, and
/// `x·a ⊑ w` when `w = u·x·v` with `x` not in `u`, `v` non-empty and
/// `a ⊑ v`. Empty sequences are never related.
pub fn seq_embed<T: PartialEq>(a: &[T], b: &[T]) -> bool {
    let Some((x, rest)) = a.split_first() else {
        return false;
    };
    let Some(at) = b.iter().position(|y| y == x) else {
        return false;
    };
    if rest.is_empty() {
        at + 1 == b.len()
    } else {
        seq_embed(rest, &b[at + 1..])
    }
}
