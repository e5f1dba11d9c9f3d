//! CSV assembly with fixed number formatting.

/// A float with 17 significant digits.
pub fn num(x: f64) -> String {
    if x.is_nan() {
        "NaN".into()
    } else if x.is_infinite() {
        if x > 0.0 { "inf".into() } else { "-inf".into() }
    } else {
        format!("{x:.16e}")
    }
}

/// In-memory CSV table; rows keep insertion order.
pub struct Table {
    writer: csv::Writer<Vec<u8>>,
}

impl Table {
    pub fn new(header: &[&str]) -> Table {
        let mut writer = csv::Writer::from_writer(Vec::new());
        writer.write_record(header).expect("writing to memory");
        Table { writer }
    }

    /// Panics if the row width differs from the header.
    pub fn row(&mut self, fields: &[String]) {
        self.writer.write_record(fields).expect("row width must match header");
    }

    pub fn into_string(self) -> String {
        let bytes = self.writer.into_inner().expect("flushing to memory");
        String::from_utf8(bytes).expect("CSV fields are UTF-8")
    }
}
