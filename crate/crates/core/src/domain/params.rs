//! Canonical request parameter encoding.

/// Encodes parameters as a sorted, url-encoded `k=v&k=v` string. The result
/// is the deduplication key for tool calls within an episode, so it must be
/// insensitive to the order parameters were assembled in.
pub fn canonicalize_params<K, V>(params: &[(K, V)]) -> String
where
    K: AsRef<str>,
    V: AsRef<str>,
{
    let mut pairs: Vec<(&str, &str)> = params
        .iter()
        .map(|(k, v)| (k.as_ref(), v.as_ref()))
        .collect();
    pairs.sort_unstable();
    let mut serializer = url::form_urlencoded::Serializer::new(String::new());
    for (k, v) in pairs {
        serializer.append_pair(k, v);
    }
    serializer.finish()
}
