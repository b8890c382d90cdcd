//! Small fixed-table unit conversion.
//!
//! Unit strings are space-separated `symbol[exponent]` terms, e.g.
//! `kg m-3` or `m s-1`. `1` (or an empty string) is dimensionless.

use std::fmt;
use std::str::FromStr;

use crate::scalar::Scalar;

use super::MediatorError;

/// Exponents of (length, time, mass, temperature).
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub struct Dimension(pub [i32; 4]);

impl Dimension {
    const LENGTH: Dimension = Dimension([1, 0, 0, 0]);
    const TIME: Dimension = Dimension([0, 1, 0, 0]);
    const MASS: Dimension = Dimension([0, 0, 1, 0]);
    const TEMPERATURE: Dimension = Dimension([0, 0, 0, 1]);

    fn scaled(self, by: i32) -> Dimension {
        Dimension(self.0.map(|e| e * by))
    }

    fn plus(self, other: Dimension) -> Dimension {
        let mut out = self.0;
        for (o, e) in out.iter_mut().zip(other.0) {
            *o += e;
        }
        Dimension(out)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum BaseUnit {
    Metre,
    Kilometre,
    Centimetre,
    Millimetre,
    Second,
    Minute,
    Hour,
    Day,
    Year,
    Kilogram,
    Gram,
    Kelvin,
    DegreeCelsius,
}

impl BaseUnit {
    pub const ALL: [BaseUnit; 13] = [
        BaseUnit::Metre,
        BaseUnit::Kilometre,
        BaseUnit::Centimetre,
        BaseUnit::Millimetre,
        BaseUnit::Second,
        BaseUnit::Minute,
        BaseUnit::Hour,
        BaseUnit::Day,
        BaseUnit::Year,
        BaseUnit::Kilogram,
        BaseUnit::Gram,
        BaseUnit::Kelvin,
        BaseUnit::DegreeCelsius,
    ];

    pub fn symbol(self) -> &'static str {
        match self {
            BaseUnit::Metre => "m",
            BaseUnit::Kilometre => "km",
            BaseUnit::Centimetre => "cm",
            BaseUnit::Millimetre => "mm",
            BaseUnit::Second => "s",
            BaseUnit::Minute => "min",
            BaseUnit::Hour => "hr",
            BaseUnit::Day => "d",
            BaseUnit::Year => "yr",
            BaseUnit::Kilogram => "kg",
            BaseUnit::Gram => "g",
            BaseUnit::Kelvin => "K",
            BaseUnit::DegreeCelsius => "degC",
        }
    }

    pub fn from_symbol(symbol: &str) -> Option<BaseUnit> {
        BaseUnit::ALL.into_iter().find(|u| u.symbol() == symbol)
    }

    pub fn dimension(self) -> Dimension {
        match self {
            BaseUnit::Metre | BaseUnit::Kilometre | BaseUnit::Centimetre | BaseUnit::Millimetre => {
                Dimension::LENGTH
            }
            BaseUnit::Second
            | BaseUnit::Minute
            | BaseUnit::Hour
            | BaseUnit::Day
            | BaseUnit::Year => Dimension::TIME,
            BaseUnit::Kilogram | BaseUnit::Gram => Dimension::MASS,
            BaseUnit::Kelvin | BaseUnit::DegreeCelsius => Dimension::TEMPERATURE,
        }
    }

    /// Size in SI base units (m, s, kg, K).
    pub fn scale(self) -> f64 {
        match self {
            BaseUnit::Metre => 1.0,
            BaseUnit::Kilometre => 1000.0,
            BaseUnit::Centimetre => 0.01,
            BaseUnit::Millimetre => 0.001,
            BaseUnit::Second => 1.0,
            BaseUnit::Minute => 60.0,
            BaseUnit::Hour => 3600.0,
            BaseUnit::Day => 86_400.0,
            // Julian year
            BaseUnit::Year => 31_557_600.0,
            BaseUnit::Kilogram => 1.0,
            BaseUnit::Gram => 0.001,
            BaseUnit::Kelvin => 1.0,
            BaseUnit::DegreeCelsius => 1.0,
        }
    }

    pub fn offset(self) -> f64 {
        match self {
            BaseUnit::DegreeCelsius => 273.15,
            _ => 0.0,
        }
    }

    pub fn is_affine(self) -> bool {
        self.offset() != 0.0
    }
}

/// A product of table units raised to integer powers.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct UnitExpr {
    factors: Vec<(BaseUnit, i32)>,
    text: String,
}

impl UnitExpr {
    pub fn parse(text: &str) -> Result<UnitExpr, MediatorError> {
        let mut factors = Vec::new();
        let trimmed = text.trim();
        if !(trimmed.is_empty() || trimmed == "1") {
            for term in trimmed.split_whitespace() {
                factors.push(parse_term(term)?);
            }
        }
        let expr = UnitExpr {
            factors,
            text: text.to_string(),
        };
        if let Some(&(_, power)) = expr.factors.iter().find(|(u, _)| u.is_affine()) {
            if power != 1 || expr.factors.len() != 1 {
                return Err(MediatorError::UnsupportedUnits(text.to_string()));
            }
        }
        Ok(expr)
    }

    pub fn factors(&self) -> &[(BaseUnit, i32)] {
        &self.factors
    }

    pub fn dimension(&self) -> Dimension {
        self.factors
            .iter()
            .fold(Dimension::default(), |acc, &(u, p)| {
                acc.plus(u.dimension().scaled(p))
            })
    }

    fn affine_offset(&self) -> f64 {
        match self.factors.as_slice() {
            [(unit, 1)] => unit.offset(),
            _ => 0.0,
        }
    }

    // Scale as numerator / denominator so that ratios of compound units
    // come out correctly rounded (`m s-1` -> `km hr-1` is 3600/1000).
    fn scale_parts(&self) -> (f64, f64) {
        let mut num = 1.0;
        let mut den = 1.0;
        for &(unit, power) in &self.factors {
            let s = unit.scale();
            if power >= 0 {
                num *= s.powi(power);
            } else {
                den *= s.powi(-power);
            }
        }
        (num, den)
    }
}

impl FromStr for UnitExpr {
    type Err = MediatorError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        UnitExpr::parse(s)
    }
}

impl fmt::Display for UnitExpr {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.text)
    }
}

fn parse_term(term: &str) -> Result<(BaseUnit, i32), MediatorError> {
    let split = term
        .find(|c: char| !c.is_ascii_alphabetic())
        .unwrap_or(term.len());
    let (symbol, exponent) = term.split_at(split);
    if symbol.is_empty() {
        return Err(MediatorError::BadUnitSyntax(term.to_string()));
    }
    let unit =
        BaseUnit::from_symbol(symbol).ok_or_else(|| MediatorError::UnknownUnit(symbol.into()))?;
    let power = if exponent.is_empty() {
        1
    } else {
        exponent
            .parse::<i32>()
            .ok()
            .filter(|&p| p != 0)
            .ok_or_else(|| MediatorError::BadUnitSyntax(term.to_string()))?
    };
    Ok((unit, power))
}

/// `out = value * scale + offset`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct UnitConversion {
    pub scale: f64,
    pub offset: f64,
}

impl UnitConversion {
    pub const IDENTITY: UnitConversion = UnitConversion {
        scale: 1.0,
        offset: 0.0,
    };

    pub fn between(from: &UnitExpr, to: &UnitExpr) -> Result<UnitConversion, MediatorError> {
        if from.dimension() != to.dimension() {
            return Err(MediatorError::IncompatibleUnits {
                from: from.to_string(),
                to: to.to_string(),
            });
        }
        let (from_num, from_den) = from.scale_parts();
        let (to_num, to_den) = to.scale_parts();
        let scale = (from_num * to_den) / (from_den * to_num);
        // value_si = v * s_from + o_from ; out = (value_si - o_to) / s_to
        let to_scale = to_num / to_den;
        let offset = (from.affine_offset() - to.affine_offset()) / to_scale;
        Ok(UnitConversion { scale, offset })
    }

    pub fn parse_between(from: &str, to: &str) -> Result<UnitConversion, MediatorError> {
        UnitConversion::between(&UnitExpr::parse(from)?, &UnitExpr::parse(to)?)
    }

    pub fn is_identity(&self) -> bool {
        *self == UnitConversion::IDENTITY
    }

    pub fn apply<S: Scalar>(&self, value: S) -> S {
        if self.is_identity() {
            value
        } else if self.offset == 0.0 {
            value * S::of(self.scale)
        } else if self.scale == 1.0 {
            value + S::of(self.offset)
        } else {
            value * S::of(self.scale) + S::of(self.offset)
        }
    }
}

pub fn convert<S: Scalar>(
    values: &[S],
    from: &UnitExpr,
    to: &UnitExpr,
) -> Result<Vec<S>, MediatorError> {
    let conversion = UnitConversion::between(from, to)?;
    Ok(values.iter().map(|&v| conversion.apply(v)).collect())
}

pub fn convert_in_place<S: Scalar>(values: &mut [S], conversion: UnitConversion) {
    if conversion.is_identity() {
        return;
    }
    for v in values {
        *v = conversion.apply(*v);
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn conv(from: &str, to: &str, v: f64) -> f64 {
        UnitConversion::parse_between(from, to).unwrap().apply(v)
    }

    #[test]
    fn table_factors() {
        assert_eq!(conv("m", "km", 1.0), 0.001);
        assert_eq!(conv("degC", "K", 20.0), 293.15);
        assert!((conv("K", "degC", 293.15) - 20.0).abs() < 1e-12);
        assert!((conv("m s-1", "km hr-1", 1.0) - 3.6).abs() < 1e-12);
        assert!((conv("kg m-3", "g cm-3", 1000.0) - 1.0).abs() < 1e-12);
        assert_eq!(conv("d", "hr", 1.0), 24.0);
    }

    #[test]
    fn dimension_and_syntax_errors() {
        assert!(matches!(
            UnitConversion::parse_between("m", "s"),
            Err(MediatorError::IncompatibleUnits { .. })
        ));
        assert!(matches!(
            UnitExpr::parse("degC m-1"),
            Err(MediatorError::UnsupportedUnits(_))
        ));
        assert!(matches!(
            UnitExpr::parse("degC2"),
            Err(MediatorError::UnsupportedUnits(_))
        ));
        assert!(matches!(
            UnitExpr::parse("furlong"),
            Err(MediatorError::UnknownUnit(_))
        ));
        assert!(matches!(
            UnitExpr::parse("m-"),
            Err(MediatorError::BadUnitSyntax(_))
        ));
        assert!(matches!(
            UnitExpr::parse("m0"),
            Err(MediatorError::BadUnitSyntax(_))
        ));
        assert!(matches!(
            UnitExpr::parse("2"),
            Err(MediatorError::BadUnitSyntax(_))
        ));
    }

    #[test]
    fn compound_units_may_repeat_symbols() {
        let a = UnitExpr::parse("m m").unwrap();
        let b = UnitExpr::parse("m2").unwrap();
        assert_eq!(a.dimension(), b.dimension());
        assert_eq!(
            UnitExpr::parse("1").unwrap().dimension(),
            Dimension::default()
        );
        assert_eq!(
            UnitExpr::parse("").unwrap().dimension(),
            Dimension::default()
        );
    }

    #[test]
    fn kelvin_squared_is_linear() {
        assert_eq!(conv("K2", "K2", 4.0), 4.0);
        assert!(UnitConversion::parse_between("K2", "degC").is_err());
    }

    #[test]
    fn generic_over_precision() {
        let from = UnitExpr::parse("km").unwrap();
        let to = UnitExpr::parse("m").unwrap();
        assert_eq!(convert(&[1.5f32], &from, &to).unwrap(), vec![1500.0f32]);
    }
}
