use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
#[error("bad duration {0:?}: expected H+:MM:SS with minutes and seconds below 60")]
pub struct DurationError(pub String);

/// Parses `H+:MM:SS` into seconds.
pub fn parse_duration(text: &str) -> Result<f64, DurationError> {
    let bad = || DurationError(text.to_string());
    let mut parts = text.trim().split(':');
    let (h, m, s) = match (parts.next(), parts.next(), parts.next(), parts.next()) {
        (Some(h), Some(m), Some(s), None) => (h, m, s),
        _ => return Err(bad()),
    };
    let digits = |p: &str| !p.is_empty() && p.bytes().all(|b| b.is_ascii_digit());
    if !digits(h) || m.len() != 2 || s.len() != 2 || !digits(m) || !digits(s) {
        return Err(bad());
    }
    let hours: u64 = h.parse().map_err(|_| bad())?;
    let minutes: u64 = m.parse().map_err(|_| bad())?;
    let seconds: u64 = s.parse().map_err(|_| bad())?;
    if minutes >= 60 || seconds >= 60 {
        return Err(bad());
    }
    Ok((hours * 3600 + minutes * 60 + seconds) as f64)
}

/// Canonical `HH:MM:SS` (hours zero-padded to at least two digits).
/// Fractional seconds are rounded to the nearest whole second.
pub fn format_duration(seconds: f64) -> String {
    let total = seconds.max(0.0).round() as u64;
    format!("{:02}:{:02}:{:02}", total / 3600, (total / 60) % 60, total % 60)
}

/// Finds a `durata: HH:MM:SS` declaration inside a physical-description
/// note, as written in Italian audiovisual finding aids.
pub fn extent_duration(note: &str) -> Option<f64> {
    let lower = note.to_lowercase();
    let start = lower.find("durata:")? + "durata:".len();
    let rest = note[start..].trim_start();
    let token: String = rest
        .chars()
        .take_while(|c| c.is_ascii_digit() || *c == ':')
        .collect();
    parse_duration(&token).ok()
}
