use std::io::{BufRead, BufReader, Read, Write};

use serde::{Deserialize, Serialize};

use super::ModelError;

/// Units accepted for hourly series.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Unit {
    #[serde(rename = "MW")]
    Mw,
    #[serde(rename = "GWs")]
    Gws,
    #[serde(rename = "EUR/MWh")]
    EurPerMwh,
    #[serde(rename = "EUR/MW/h")]
    EurPerMwPerH,
}

impl Unit {
    pub fn as_str(self) -> &'static str {
        match self {
            Unit::Mw => "MW",
            Unit::Gws => "GWs",
            Unit::EurPerMwh => "EUR/MWh",
            Unit::EurPerMwPerH => "EUR/MW/h",
        }
    }
}

impl std::str::FromStr for Unit {
    type Err = ModelError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.trim() {
            "MW" => Ok(Unit::Mw),
            "GWs" => Ok(Unit::Gws),
            "EUR/MWh" => Ok(Unit::EurPerMwh),
            "EUR/MW/h" => Ok(Unit::EurPerMwPerH),
            other => Err(ModelError::UnknownUnit(other.to_string())),
        }
    }
}

impl std::fmt::Display for Unit {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.as_str())
    }
}

/// A unit-tagged series with one value per study hour.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct HourlySeries {
    pub label: String,
    pub unit: Unit,
    pub values: Vec<f64>,
}

impl HourlySeries {
    pub fn new(label: impl Into<String>, unit: Unit, values: Vec<f64>) -> Self {
        Self {
            label: label.into(),
            unit,
            values,
        }
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    pub fn require_unit(&self, unit: Unit) -> Result<(), ModelError> {
        if self.unit == unit {
            Ok(())
        } else {
            Err(ModelError::Schema(format!(
                "series '{}' is in {}, expected {}",
                self.label, self.unit, unit
            )))
        }
    }

    /// Parses `series.csv`: a `#unit=` comment line, an optional `#label=`
    /// line, a `hour,value` header, then hours `0..n` in order.
    pub fn read_csv<R: Read>(reader: R) -> Result<Self, ModelError> {
        let reader = BufReader::new(reader);
        let mut unit = None;
        let mut label = String::new();
        let mut body = String::new();
        for line in reader.lines() {
            let line = line?;
            let trimmed = line.trim();
            if let Some(rest) = trimmed.strip_prefix('#') {
                let rest = rest.trim();
                if let Some(u) = rest.strip_prefix("unit=") {
                    unit = Some(u.parse::<Unit>()?);
                } else if let Some(l) = rest.strip_prefix("label=") {
                    label = l.trim().to_string();
                }
                continue;
            }
            body.push_str(&line);
            body.push('\n');
        }
        let unit = unit.ok_or_else(|| ModelError::Schema("missing '#unit=' header line".into()))?;

        #[derive(Deserialize)]
        struct Row {
            hour: usize,
            value: f64,
        }
        let mut rdr = csv::ReaderBuilder::new()
            .trim(csv::Trim::All)
            .from_reader(body.as_bytes());
        let mut values = Vec::new();
        for result in rdr.deserialize::<Row>() {
            let row = result.map_err(ModelError::from_csv)?;
            if row.hour != values.len() {
                return Err(ModelError::Schema(format!(
                    "expected hour {}, found hour {}",
                    values.len(),
                    row.hour
                )));
            }
            if !row.value.is_finite() {
                return Err(ModelError::Schema(format!("hour {}: value is not finite", row.hour)));
            }
            values.push(row.value);
        }
        Ok(Self { label, unit, values })
    }

    pub fn write_csv<W: Write>(&self, mut writer: W) -> Result<(), ModelError> {
        writeln!(writer, "#unit={}", self.unit)?;
        if !self.label.is_empty() {
            writeln!(writer, "#label={}", self.label)?;
        }
        writeln!(writer, "hour,value")?;
        for (h, v) in self.values.iter().enumerate() {
            writeln!(writer, "{h},{v}")?;
        }
        Ok(())
    }
}
