use std::fs;
use std::io::Write;
use std::path::Path;

use super::{parse_address, parse_prefix, AddrError, NybblePrefix, NybbleSeq};

/// Non-blank, non-comment lines with their 1-based line numbers. Text after
/// `#` is a comment.
fn content_lines(text: &str) -> impl Iterator<Item = (usize, &str)> {
    text.lines().enumerate().filter_map(|(i, line)| {
        let line = line.split('#').next().unwrap_or("").trim();
        (!line.is_empty()).then_some((i + 1, line))
    })
}

/// Parses a seed list: one address per line.
pub fn parse_seed_list(text: &str) -> Result<Vec<NybbleSeq>, AddrError> {
    content_lines(text)
        .map(|(line, s)| {
            parse_address(s).map_err(|e| AddrError::Line { line, source: Box::new(e) })
        })
        .collect()
}

/// Parses an aliased-prefix list: one CIDR per line. Prefixes whose length
/// had to be rounded to a nybble boundary are logged.
pub fn parse_prefix_list(text: &str) -> Result<Vec<NybblePrefix>, AddrError> {
    content_lines(text)
        .map(|(line, s)| {
            let parsed =
                parse_prefix(s).map_err(|e| AddrError::Line { line, source: Box::new(e) })?;
            if parsed.was_rounded() {
                log::warn!(
                    "line {line}: /{} rounded down to /{} (nybble boundary)",
                    parsed.requested_bits,
                    parsed.prefix.bits()
                );
            }
            Ok(parsed.prefix)
        })
        .collect()
}

pub fn read_seed_file(path: impl AsRef<Path>) -> Result<Vec<NybbleSeq>, AddrError> {
    let path = path.as_ref();
    let text = fs::read_to_string(path).map_err(|e| AddrError::Io(path.display().to_string(), e))?;
    parse_seed_list(&text)
}

pub fn read_prefix_file(path: impl AsRef<Path>) -> Result<Vec<NybblePrefix>, AddrError> {
    let path = path.as_ref();
    let text = fs::read_to_string(path).map_err(|e| AddrError::Io(path.display().to_string(), e))?;
    parse_prefix_list(&text)
}

/// Writes addresses one per line in canonical form.
pub fn write_address_file<'a>(
    path: impl AsRef<Path>,
    addrs: impl IntoIterator<Item = &'a NybbleSeq>,
) -> std::io::Result<()> {
    let mut out = std::io::BufWriter::new(fs::File::create(path)?);
    for a in addrs {
        writeln!(out, "{a}")?;
    }
    out.flush()
}

pub fn write_prefix_file<'a>(
    path: impl AsRef<Path>,
    prefixes: impl IntoIterator<Item = &'a NybblePrefix>,
) -> std::io::Result<()> {
    let mut out = std::io::BufWriter::new(fs::File::create(path)?);
    for p in prefixes {
        writeln!(out, "{p}")?;
    }
    out.flush()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn skips_comments_and_blanks() {
        let text = "# header\n\n2001:db8::1\n  2001:db8::2   # trailing\n";
        let seeds = parse_seed_list(text).unwrap();
        assert_eq!(seeds.len(), 2);
        assert_eq!(seeds[1], parse_address("2001:db8::2").unwrap());
    }

    #[test]
    fn reports_line_number() {
        let err = parse_seed_list("::1\nnope\n").unwrap_err();
        assert!(matches!(err, AddrError::Line { line: 2, .. }), "{err}");
    }

    #[test]
    fn prefix_list() {
        let ps = parse_prefix_list("2001:db8::/32\n# x\n2001:db8:ff00::/40\n").unwrap();
        assert_eq!(ps.len(), 2);
        assert_eq!(ps[1].len(), 10);
    }
}
