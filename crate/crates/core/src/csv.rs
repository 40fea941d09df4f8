//! Tiny deterministic CSV assembly for simulation output.
//!
//! Experiment parameters are echoed as `#`-prefixed comment lines ahead of
//! the header row, which gnuplot and most CSV readers skip. All fields are
//! numeric, so no quoting is needed; floats use Rust's shortest-roundtrip
//! formatting, which is identical on every platform.

use std::fmt::Display;

#[derive(Default)]
pub struct CsvBuilder {
    out: String,
}

impl CsvBuilder {
    pub fn new() -> CsvBuilder {
        CsvBuilder::default()
    }

    pub fn comment(&mut self, key: &str, value: impl Display) -> &mut Self {
        self.out.push_str(&format!("# {key}={value}\n"));
        self
    }

    pub fn columns(&mut self, names: &[&str]) -> &mut Self {
        self.out.push_str(&names.join(","));
        self.out.push('\n');
        self
    }

    pub fn row<I>(&mut self, fields: I) -> &mut Self
    where
        I: IntoIterator,
        I::Item: Display,
    {
        let mut first = true;
        for f in fields {
            if !first {
                self.out.push(',');
            }
            first = false;
            self.out.push_str(&f.to_string());
        }
        self.out.push('\n');
        self
    }

    pub fn finish(self) -> String {
        self.out
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn renders_comments_header_and_rows() {
        let mut csv = CsvBuilder::new();
        csv.comment("seed", 7)
            .columns(&["a", "b"])
            .row(["1", "2"])
            .row([format!("{}", 0.5f64), format!("{}", 3)]);
        assert_eq!(csv.finish(), "# seed=7\na,b\n1,2\n0.5,3\n");
    }
}
