use resurgamma::numerics::format_sci;
use resurgamma::Float;

/// Decimal formatting tied to the working precision.
pub struct Printer {
    digits: usize,
}

impl Printer {
    pub fn new(bits: u32) -> Self {
        let digits = ((bits as f64 * std::f64::consts::LOG10_2).floor() as usize).saturating_sub(2).max(10);
        Self { digits }
    }

    pub fn real(&self, x: &Float) -> String {
        format_sci(x, self.digits)
    }

    /// Few digits, for magnitudes of errors and bounds.
    pub fn short(&self, x: &Float) -> String {
        format_sci(x, 12)
    }
}

/// Rows with a fixed header, rendered as CSV.
pub struct Table {
    header: Vec<String>,
    rows: Vec<Vec<String>>,
}

impl Table {
    pub fn new(header: &[&str]) -> Self {
        Self { header: header.iter().map(|s| s.to_string()).collect(), rows: Vec::new() }
    }

    pub fn row(&mut self, r: Vec<String>) {
        debug_assert_eq!(r.len(), self.header.len());
        self.rows.push(r);
    }

    pub fn to_csv(&self) -> Result<String, csv::Error> {
        let mut w = csv::Writer::from_writer(Vec::new());
        w.write_record(&self.header)?;
        for r in &self.rows {
            w.write_record(r)?;
        }
        let bytes = w.into_inner().map_err(|e| e.into_error())?;
        Ok(String::from_utf8(bytes).expect("utf-8 fields"))
    }
}
