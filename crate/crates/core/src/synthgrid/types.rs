use alloc::vec::Vec;
use core::fmt;

use crate::error::{param_err, Result};

/// Nominal system frequency in Hz.
pub const F0: f64 = 60.0;

/// Buses of the 13-bus feeder that appear either as measurement points or as
/// event locations. Ordering is by numeric id.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
#[cfg_attr(feature = "serde", serde(try_from = "u16", into = "u16"))]
pub enum BusId {
    B632,
    B634,
    B671,
    B675,
    B680,
}

impl BusId {
    /// Buses carrying a waveform measurement unit, ascending.
    pub const MONITORED: [BusId; 3] = [BusId::B632, BusId::B671, BusId::B675];
    pub const ALL: [BusId; 5] = [
        BusId::B632,
        BusId::B634,
        BusId::B671,
        BusId::B675,
        BusId::B680,
    ];

    pub fn number(self) -> u16 {
        match self {
            BusId::B632 => 632,
            BusId::B634 => 634,
            BusId::B671 => 671,
            BusId::B675 => 675,
            BusId::B680 => 680,
        }
    }

    pub fn from_number(n: u16) -> Option<Self> {
        BusId::ALL.into_iter().find(|b| b.number() == n)
    }

    pub fn is_monitored(self) -> bool {
        BusId::MONITORED.contains(&self)
    }

    pub(crate) fn index(self) -> usize {
        self as usize
    }

    pub(crate) fn monitored_index(self) -> Option<usize> {
        BusId::MONITORED.iter().position(|&b| b == self)
    }
}

impl fmt::Display for BusId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.number())
    }
}

impl From<BusId> for u16 {
    fn from(b: BusId) -> u16 {
        b.number()
    }
}

impl TryFrom<u16> for BusId {
    type Error = alloc::string::String;
    fn try_from(n: u16) -> core::result::Result<Self, Self::Error> {
        BusId::from_number(n).ok_or_else(|| alloc::format!("unknown bus {n}"))
    }
}

/// Parses a comma separated bus list such as `632,671,675`, returning the
/// monitored buses in ascending order. Duplicates and unmonitored buses are
/// rejected.
pub fn parse_bus_list(text: &str) -> Result<Vec<BusId>> {
    let mut buses = Vec::new();
    for part in text.split(',').map(str::trim).filter(|p| !p.is_empty()) {
        let n: u16 = part
            .parse()
            .map_err(|_| param_err!("bus id `{part}` is not a number"))?;
        let bus = BusId::from_number(n).ok_or_else(|| param_err!("unknown bus {n}"))?;
        if !bus.is_monitored() {
            return Err(param_err!("bus {n} has no measurement unit"));
        }
        if buses.contains(&bus) {
            return Err(param_err!("bus {n} listed twice"));
        }
        buses.push(bus);
    }
    if buses.is_empty() {
        return Err(param_err!("empty bus list"));
    }
    buses.sort();
    Ok(buses)
}

/// The four event causes. Integer codes 1..=4 are stable.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
#[cfg_attr(feature = "serde", serde(try_from = "u8", into = "u8"))]
pub enum EventClass {
    CapacitorSwitching = 1,
    TransformerEnergization = 2,
    Fault = 3,
    HighImpedanceFault = 4,
}

impl EventClass {
    pub const ALL: [EventClass; 4] = [
        EventClass::CapacitorSwitching,
        EventClass::TransformerEnergization,
        EventClass::Fault,
        EventClass::HighImpedanceFault,
    ];
    pub const COUNT: usize = 4;

    pub fn code(self) -> u8 {
        self as u8
    }

    /// Zero-based position, `code() - 1`.
    pub fn index(self) -> usize {
        self as usize - 1
    }

    pub fn from_code(code: u8) -> Option<Self> {
        match code {
            1 => Some(EventClass::CapacitorSwitching),
            2 => Some(EventClass::TransformerEnergization),
            3 => Some(EventClass::Fault),
            4 => Some(EventClass::HighImpedanceFault),
            _ => None,
        }
    }

    pub fn from_index(i: usize) -> Option<Self> {
        Self::ALL.get(i).copied()
    }

    pub fn name(self) -> &'static str {
        match self {
            EventClass::CapacitorSwitching => "capacitor_switching",
            EventClass::TransformerEnergization => "transformer_energization",
            EventClass::Fault => "fault",
            EventClass::HighImpedanceFault => "hif",
        }
    }
}

impl fmt::Display for EventClass {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl From<EventClass> for u8 {
    fn from(c: EventClass) -> u8 {
        c.code()
    }
}

impl TryFrom<u8> for EventClass {
    type Error = alloc::string::String;
    fn try_from(code: u8) -> core::result::Result<Self, Self::Error> {
        EventClass::from_code(code).ok_or_else(|| alloc::format!("unknown event class {code}"))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub enum FaultKind {
    #[cfg_attr(feature = "serde", serde(rename = "LG"))]
    Lg,
    #[cfg_attr(feature = "serde", serde(rename = "LL"))]
    Ll,
    #[cfg_attr(feature = "serde", serde(rename = "LLG"))]
    Llg,
    #[cfg_attr(feature = "serde", serde(rename = "LLLG"))]
    Lllg,
}

impl FaultKind {
    pub const ALL: [FaultKind; 4] = [FaultKind::Lg, FaultKind::Ll, FaultKind::Llg, FaultKind::Lllg];

    /// Phases (a, b, c) involved in the fault.
    pub fn phases(self) -> [bool; 3] {
        match self {
            FaultKind::Lg => [true, false, false],
            FaultKind::Ll | FaultKind::Llg => [true, true, false],
            FaultKind::Lllg => [true, true, true],
        }
    }

    pub fn is_grounded(self) -> bool {
        !matches!(self, FaultKind::Ll)
    }
}

/// Class-specific event parameters.
#[derive(Debug, Clone, Copy, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
#[cfg_attr(feature = "serde", serde(tag = "kind", rename_all = "snake_case"))]
pub enum ClassParams {
    /// `size_index` selects the bank size; `amplitude` scales the transient
    /// (1.0 is nominal, 0.0 switches a bank with no visible transient).
    Capacitor { size_index: u8, amplitude: f64 },
    Transformer { tap_index: u8 },
    /// `resistance_ohm` may be infinite (open circuit).
    Fault { fault: FaultKind, resistance_ohm: f64 },
    Hif { draw_index: u8 },
}

impl ClassParams {
    pub fn class(&self) -> EventClass {
        match self {
            ClassParams::Capacitor { .. } => EventClass::CapacitorSwitching,
            ClassParams::Transformer { .. } => EventClass::TransformerEnergization,
            ClassParams::Fault { .. } => EventClass::Fault,
            ClassParams::Hif { .. } => EventClass::HighImpedanceFault,
        }
    }
}

/// Fault locations of the event grid.
pub const FAULT_LOCATIONS: [BusId; 4] = [BusId::B632, BusId::B634, BusId::B675, BusId::B680];

/// Nominal event instant; the actual instant is shifted into the following
/// cycle so that phase a at bus 632 sits at the inception angle.
pub const NOMINAL_EVENT_TIME: f64 = 0.05;

/// One labeled event.
#[derive(Debug, Clone, Copy, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct EventSpec {
    pub class: EventClass,
    pub inception_angle_deg: f64,
    pub location: BusId,
    pub params: ClassParams,
    pub event_time: f64,
}

impl EventSpec {
    /// Builds a spec whose event instant realizes `inception_angle_deg`.
    pub fn new(
        class: EventClass,
        inception_angle_deg: f64,
        location: BusId,
        params: ClassParams,
    ) -> Result<Self> {
        let spec = EventSpec {
            class,
            inception_angle_deg,
            location,
            params,
            event_time: event_time_for_angle(inception_angle_deg),
        };
        spec.validate()?;
        Ok(spec)
    }

    pub fn validate(&self) -> Result<()> {
        if self.params.class() != self.class {
            return Err(param_err!(
                "class {} carries parameters for {}",
                self.class,
                self.params.class()
            ));
        }
        if !(0.0..360.0).contains(&self.inception_angle_deg) {
            return Err(param_err!(
                "inception angle {} outside [0, 360)",
                self.inception_angle_deg
            ));
        }
        if !self.event_time.is_finite() || self.event_time <= 0.0 {
            return Err(param_err!("event time {} not positive", self.event_time));
        }
        match self.params {
            ClassParams::Capacitor { amplitude, .. } if !(amplitude.is_finite() && amplitude >= 0.0) => {
                Err(param_err!("capacitor amplitude {amplitude} must be finite and >= 0"))
            }
            ClassParams::Fault { resistance_ohm, .. } => {
                if !FAULT_LOCATIONS.contains(&self.location) {
                    return Err(param_err!("fault location {} not in the fault grid", self.location));
                }
                if resistance_ohm.is_nan() || resistance_ohm < 0.0 {
                    return Err(param_err!("fault resistance {resistance_ohm} must be >= 0"));
                }
                Ok(())
            }
            _ => Ok(()),
        }
    }
}

pub fn event_time_for_angle(angle_deg: f64) -> f64 {
    NOMINAL_EVENT_TIME + angle_deg / (360.0 * F0)
}
