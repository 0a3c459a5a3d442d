//! Four-channel switched load bank.
//!
//! Every channel carries essential loads, which are always on, and up to
//! eight nonessential loads, each behind a relay driven by one bit of the
//! channel's 8-bit mask. Bit `i` (LSB = 0) drives the `i`-th nonessential
//! load in table row order; a set bit opens the relay.

use std::collections::HashSet;
use std::fmt;
use std::io;
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

pub const CHANNEL_COUNT: usize = 4;
pub const MASK_BITS: usize = 8;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LoadSpec {
    pub name: String,
    pub power_kw: f64,
    pub essential: bool,
}

impl LoadSpec {
    pub fn new(name: &str, power_kw: f64, essential: bool) -> Self {
        LoadSpec {
            name: name.to_string(),
            power_kw,
            essential,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ChannelSpec {
    id: u8,
    loads: Vec<LoadSpec>,
    /// Indices into `loads` of the switchable loads, in bit order.
    nonessential: Vec<usize>,
}

impl ChannelSpec {
    pub fn new(id: u8, loads: Vec<LoadSpec>) -> Result<Self> {
        if !(1..=CHANNEL_COUNT as u8).contains(&id) {
            return Err(Error::Config(format!("channel id {id} is not in 1..=4")));
        }
        let mut seen = HashSet::new();
        for load in &loads {
            if !(load.power_kw.is_finite() && load.power_kw > 0.0) {
                return Err(Error::Config(format!(
                    "channel {id}: load `{}` has non-positive power {}",
                    load.name, load.power_kw
                )));
            }
            if !seen.insert(load.name.as_str()) {
                return Err(Error::Config(format!(
                    "channel {id}: duplicate load name `{}`",
                    load.name
                )));
            }
        }
        let nonessential: Vec<usize> = loads
            .iter()
            .enumerate()
            .filter(|(_, l)| !l.essential)
            .map(|(i, _)| i)
            .collect();
        if nonessential.len() > MASK_BITS {
            return Err(Error::Config(format!(
                "channel {id}: {} nonessential loads exceed the {MASK_BITS} mask bits",
                nonessential.len()
            )));
        }
        Ok(ChannelSpec {
            id,
            loads,
            nonessential,
        })
    }

    pub fn id(&self) -> u8 {
        self.id
    }

    pub fn loads(&self) -> &[LoadSpec] {
        &self.loads
    }

    /// Switchable loads in mask-bit order.
    pub fn nonessential_order(&self) -> impl Iterator<Item = &LoadSpec> {
        self.nonessential.iter().map(|&i| &self.loads[i])
    }

    /// Mask bit controlling the named load, or `None` if the load is
    /// essential or absent.
    pub fn bit_of(&self, name: &str) -> Option<u8> {
        self.nonessential_order()
            .position(|l| l.name == name)
            .map(|b| b as u8)
    }

    pub fn total_kw(&self) -> f64 {
        self.loads.iter().map(|l| l.power_kw).sum()
    }

    pub fn essential_kw(&self) -> f64 {
        self.loads
            .iter()
            .filter(|l| l.essential)
            .map(|l| l.power_kw)
            .sum()
    }

    /// Power drawn under `mask`. Bits with no load behind them are ignored.
    pub fn power(&self, mask: ChannelMask) -> f64 {
        let mut bit = 0;
        let mut sum = 0.0;
        for load in &self.loads {
            if load.essential {
                sum += load.power_kw;
            } else {
                if !mask.is_off(bit) {
                    sum += load.power_kw;
                }
                bit += 1;
            }
        }
        sum
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct LoadTable {
    channels: [ChannelSpec; CHANNEL_COUNT],
}

impl LoadTable {
    /// Channels must be given with ids 1..=4 in order.
    pub fn new(channels: [ChannelSpec; CHANNEL_COUNT]) -> Result<Self> {
        for (i, ch) in channels.iter().enumerate() {
            if ch.id as usize != i + 1 {
                return Err(Error::Config(format!(
                    "channel at position {} has id {}",
                    i + 1,
                    ch.id
                )));
            }
        }
        Ok(LoadTable { channels })
    }

    pub fn channels(&self) -> &[ChannelSpec; CHANNEL_COUNT] {
        &self.channels
    }

    pub fn channel(&self, id: u8) -> Option<&ChannelSpec> {
        self.channels.get((id as usize).checked_sub(1)?)
    }

    pub fn total_kw(&self) -> f64 {
        self.channels.iter().map(ChannelSpec::total_kw).sum()
    }

    /// Load that cannot be shed, i.e. the draw with every mask at 255.
    pub fn essential_kw(&self) -> f64 {
        self.channels.iter().map(ChannelSpec::essential_kw).sum()
    }

    /// Per-channel power under `masks`.
    pub fn channel_powers(&self, masks: &MaskSet) -> [f64; CHANNEL_COUNT] {
        let mut out = [0.0; CHANNEL_COUNT];
        for (slot, (ch, m)) in out.iter_mut().zip(self.channels.iter().zip(masks.0)) {
            *slot = ch.power(m);
        }
        out
    }

    pub fn total_power(&self, masks: &MaskSet) -> f64 {
        self.channel_powers(masks).iter().sum()
    }

    /// Reads the `channel,name,power_kw,essential` CSV format.
    pub fn from_csv_reader<R: io::Read>(reader: R) -> std::result::Result<Self, String> {
        let mut rdr = csv::ReaderBuilder::new()
            .trim(csv::Trim::All)
            .from_reader(reader);
        let headers = rdr.headers().map_err(|e| e.to_string())?.clone();
        let expected = ["channel", "name", "power_kw", "essential"];
        if headers.iter().ne(expected.iter().copied()) {
            return Err(format!(
                "expected header `{}`, found `{}`",
                expected.join(","),
                headers.iter().collect::<Vec<_>>().join(",")
            ));
        }

        let mut groups: Vec<(u8, Vec<LoadSpec>)> = Vec::new();
        for (i, rec) in rdr.deserialize::<LoadRow>().enumerate() {
            let row = rec.map_err(|e| format!("row {}: {e}", i + 1))?;
            match groups.last_mut() {
                Some((id, loads)) if *id == row.channel => loads.push(row.into_spec()),
                _ => {
                    if groups.iter().any(|(id, _)| *id == row.channel) {
                        return Err(format!(
                            "row {}: rows of channel {} are not contiguous",
                            i + 1,
                            row.channel
                        ));
                    }
                    groups.push((row.channel, vec![row.into_spec()]));
                }
            }
        }
        groups.sort_by_key(|(id, _)| *id);
        let ids: Vec<u8> = groups.iter().map(|(id, _)| *id).collect();
        if ids != [1, 2, 3, 4] {
            return Err(format!("expected channels 1,2,3,4, found {ids:?}"));
        }
        let mut chans = Vec::with_capacity(CHANNEL_COUNT);
        for (id, loads) in groups {
            chans.push(ChannelSpec::new(id, loads).map_err(|e| e.to_string())?);
        }
        let chans: [ChannelSpec; CHANNEL_COUNT] = chans
            .try_into()
            .expect("exactly four channels checked above");
        LoadTable::new(chans).map_err(|e| e.to_string())
    }

    pub fn from_csv_path(path: &Path) -> Result<Self> {
        let file = std::fs::File::open(path).map_err(|e| Error::io(path, e))?;
        LoadTable::from_csv_reader(file).map_err(|msg| Error::Parse {
            path: path.to_path_buf(),
            msg,
        })
    }

    pub fn write_csv<W: io::Write>(&self, writer: W) -> csv::Result<()> {
        let mut w = csv::Writer::from_writer(writer);
        for ch in &self.channels {
            for l in &ch.loads {
                w.serialize(LoadRow {
                    channel: ch.id,
                    name: l.name.clone(),
                    power_kw: l.power_kw,
                    essential: l.essential,
                })?;
            }
        }
        w.flush()?;
        Ok(())
    }
}

#[derive(Debug, Serialize, Deserialize)]
struct LoadRow {
    channel: u8,
    name: String,
    power_kw: f64,
    essential: bool,
}

impl LoadRow {
    fn into_spec(self) -> LoadSpec {
        LoadSpec {
            name: self.name,
            power_kw: self.power_kw,
            essential: self.essential,
        }
    }
}

/// Relay command word for one channel.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Default, Serialize, Deserialize)]
pub struct ChannelMask(pub u8);

impl ChannelMask {
    pub const ALL_ON: ChannelMask = ChannelMask(0);
    pub const ALL_OFF: ChannelMask = ChannelMask(u8::MAX);

    pub fn is_off(self, bit: usize) -> bool {
        bit < MASK_BITS && (self.0 >> bit) & 1 == 1
    }

    pub fn from_bits(bits: impl IntoIterator<Item = u8>) -> Self {
        ChannelMask(bits.into_iter().fold(0u8, |m, b| m | (1 << b)))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SwitchState {
    On,
    Off,
}

/// Expands a mask into the eight relay states, bit 0 first.
pub fn decode_mask(mask: ChannelMask) -> [SwitchState; MASK_BITS] {
    std::array::from_fn(|bit| {
        if mask.is_off(bit) {
            SwitchState::Off
        } else {
            SwitchState::On
        }
    })
}

/// One mask per channel, indexed by channel id − 1.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Default, Serialize, Deserialize)]
pub struct MaskSet(pub [ChannelMask; CHANNEL_COUNT]);

impl MaskSet {
    pub const ALL_ON: MaskSet = MaskSet([ChannelMask::ALL_ON; CHANNEL_COUNT]);
    pub const ALL_OFF: MaskSet = MaskSet([ChannelMask::ALL_OFF; CHANNEL_COUNT]);

    pub fn new(values: [u8; CHANNEL_COUNT]) -> Self {
        MaskSet(values.map(ChannelMask))
    }

    pub fn values(&self) -> [u8; CHANNEL_COUNT] {
        self.0.map(|m| m.0)
    }
}

impl fmt::Display for MaskSet {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let v = self.values();
        write!(f, "{},{},{},{}", v[0], v[1], v[2], v[3])
    }
}

impl std::str::FromStr for MaskSet {
    type Err = String;

    fn from_str(s: &str) -> std::result::Result<Self, String> {
        let parts: Vec<&str> = s.split(',').map(str::trim).collect();
        if parts.len() != CHANNEL_COUNT {
            return Err(format!("expected 4 comma-separated masks, got `{s}`"));
        }
        let mut out = [0u8; CHANNEL_COUNT];
        for (slot, p) in out.iter_mut().zip(&parts) {
            *slot = p
                .parse::<u8>()
                .map_err(|_| format!("mask `{p}` is not an integer in 0..=255"))?;
        }
        Ok(MaskSet::new(out))
    }
}

pub fn channel_power(channel: &ChannelSpec, mask: ChannelMask) -> f64 {
    channel.power(mask)
}

pub fn total_power(table: &LoadTable, masks: &MaskSet) -> f64 {
    table.total_power(masks)
}

pub fn essential_power(table: &LoadTable) -> f64 {
    table.essential_kw()
}

/// The U.S.-segment load bank: 11 + 11 + 8 + 8 loads.
pub fn builtin_iss_table() -> LoadTable {
    fn channel(id: u8, rows: &[(&str, f64, bool)]) -> ChannelSpec {
        let loads = rows
            .iter()
            .map(|&(n, p, e)| LoadSpec::new(n, p, e))
            .collect();
        ChannelSpec::new(id, loads).expect("builtin table is valid")
    }
    let core = |fan: f64| -> Vec<(&'static str, f64, bool)> {
        vec![
            ("Battery Unit", 6.645, true),
            ("Fan", fan, false),
            ("Atmosphere Controller", 1.2, true),
            ("Crew System", 0.575, true),
            ("Control System", 0.82, true),
            ("Communications", 0.47, true),
            ("Lighting Bank", 1.08, false),
            ("Main Computer", 0.385, true),
            ("Robotic Workstation", 0.895, false),
            ("Robotic Arm", 3.21, false),
            ("Air Pump", 1.15, true),
        ]
    };
    let ch3 = [
        ("Battery Unit", 6.645, true),
        ("Fan", 0.535, false),
        ("Lighting Bank", 0.72, false),
        ("Experiment U.S. 1", 4.25, false),
        ("Experiment U.S. 3", 2.275, false),
        ("Experiment Russian 1", 2.715, false),
        ("Experiment Russian 3", 1.845, false),
        ("Experiment Japan 1", 1.985, false),
    ];
    let ch4 = [
        ("Battery Unit", 6.645, true),
        ("Fan", 1.07, false),
        ("Lighting Bank", 0.36, false),
        ("Experiment U.S. 2", 3.005, false),
        ("Experiment U.S. 4", 2.26, false),
        ("Experiment Russian 2", 3.2, false),
        ("Experiment Japan 2", 0.92, false),
        ("Experiment Japan 3", 3.46, false),
    ];
    LoadTable::new([
        channel(1, &core(1.605)),
        channel(2, &core(1.605)),
        channel(3, &ch3),
        channel(4, &ch4),
    ])
    .expect("builtin table is valid")
}

#[cfg(test)]
mod tests {
    use super::*;

    const TOL: f64 = 1e-9;

    /// Naive reference: reads the mask as a binary string and walks the
    /// loads, counting switchable rows by hand.
    fn brute_force_power(ch: &ChannelSpec, mask: u8) -> f64 {
        let bits: Vec<char> = format!("{mask:08b}").chars().rev().collect();
        let mut k = 0;
        let mut total = 0.0;
        for load in ch.loads() {
            if load.essential {
                total += load.power_kw;
                continue;
            }
            if bits[k] == '0' {
                total += load.power_kw;
            }
            k += 1;
        }
        total
    }

    #[test]
    fn builtin_table_shape() {
        let t = builtin_iss_table();
        let counts: Vec<usize> = t.channels().iter().map(|c| c.loads().len()).collect();
        assert_eq!(counts, [11, 11, 8, 8]);
        let essential: usize = t
            .channels()
            .iter()
            .map(|c| c.loads().iter().filter(|l| l.essential).count())
            .sum();
        assert_eq!(essential, 16);
        let exp = t
            .channel(3)
            .unwrap()
            .loads()
            .iter()
            .find(|l| l.name == "Experiment U.S. 1");
        assert_eq!(exp.map(|l| l.power_kw), Some(4.25));
    }

    #[test]
    fn channel_totals_match_table() {
        let t = builtin_iss_table();
        for (ch, want) in t.channels().iter().zip([18.035, 18.035, 20.97, 20.92]) {
            assert!((ch.total_kw() - want).abs() < TOL, "channel {}", ch.id());
        }
        assert!((t.total_kw() - 77.96).abs() < TOL);
        assert!((t.essential_kw() - 35.78).abs() < TOL);
    }

    #[test]
    fn decode_examples() {
        assert!(decode_mask(ChannelMask(255))
            .iter()
            .all(|s| *s == SwitchState::Off));
        assert!(decode_mask(ChannelMask(0))
            .iter()
            .all(|s| *s == SwitchState::On));
        let d = decode_mask(ChannelMask(12));
        for (i, s) in d.iter().enumerate() {
            let want = if i == 2 || i == 3 {
                SwitchState::Off
            } else {
                SwitchState::On
            };
            assert_eq!(*s, want, "bit {i}");
        }
    }

    #[test]
    fn channel_power_examples() {
        let t = builtin_iss_table();
        let c1 = t.channel(1).unwrap();
        let c3 = t.channel(3).unwrap();
        assert!((c1.power(ChannelMask(0)) - 18.035).abs() < TOL);
        assert!((c1.power(ChannelMask(255)) - 11.245).abs() < TOL);
        assert!((c3.power(ChannelMask(255)) - 6.645).abs() < TOL);
        assert!((c1.power(ChannelMask(12)) - 13.930).abs() < TOL);
    }

    #[test]
    fn essential_portions() {
        let t = builtin_iss_table();
        let ch = t.channels();
        assert!((ch[0].essential_kw() + ch[1].essential_kw() - 22.49).abs() < TOL);
        assert!((ch[2].essential_kw() + ch[3].essential_kw() - 13.290).abs() < TOL);
        assert!((essential_power(&t) - total_power(&t, &MaskSet::ALL_OFF)).abs() < TOL);
    }

    #[test]
    fn all_masks_match_brute_force() {
        let t = builtin_iss_table();
        for ch in t.channels() {
            for m in 0..=255u8 {
                assert_eq!(ch.power(ChannelMask(m)), brute_force_power(ch, m));
            }
        }
    }

    #[test]
    fn power_bounded_and_monotone_in_bits() {
        let t = builtin_iss_table();
        for ch in t.channels() {
            for m in 0..=255u8 {
                let p = ch.power(ChannelMask(m));
                assert!(p >= ch.essential_kw() - TOL && p <= ch.total_kw() + TOL);
                for b in 0..8 {
                    let more = m | (1 << b);
                    assert!(ch.power(ChannelMask(more)) <= p + TOL);
                }
            }
        }
    }

    #[test]
    fn mask_parse() {
        let m: MaskSet = "12, 12,100,72".parse().unwrap();
        assert_eq!(m.values(), [12, 12, 100, 72]);
        assert_eq!(m.to_string(), "12,12,100,72");
        assert!("1,2,3".parse::<MaskSet>().is_err());
        assert!("1,2,3,256".parse::<MaskSet>().is_err());
    }

    #[test]
    fn invalid_channels_rejected() {
        let dup = vec![
            LoadSpec::new("A", 1.0, true),
            LoadSpec::new("A", 2.0, false),
        ];
        assert!(ChannelSpec::new(1, dup).is_err());
        assert!(ChannelSpec::new(1, vec![LoadSpec::new("A", 0.0, true)]).is_err());
        let nine = (0..9)
            .map(|i| LoadSpec::new(&format!("L{i}"), 1.0, false))
            .collect();
        assert!(ChannelSpec::new(1, nine).is_err());
        assert!(ChannelSpec::new(5, vec![]).is_err());
    }

    #[test]
    fn csv_round_trip_of_builtin() {
        let t = builtin_iss_table();
        let mut buf = Vec::new();
        t.write_csv(&mut buf).unwrap();
        let text = String::from_utf8(buf).unwrap();
        assert!(text.starts_with("channel,name,power_kw,essential\n"));
        assert_eq!(LoadTable::from_csv_reader(text.as_bytes()).unwrap(), t);
    }

    #[test]
    fn csv_rejects_bad_tables() {
        let bad_header = "chan,name,power_kw,essential\n1,A,1.0,true\n";
        assert!(LoadTable::from_csv_reader(bad_header.as_bytes()).is_err());
        let missing = "channel,name,power_kw,essential\n1,A,1,true\n2,A,1,true\n3,A,1,true\n";
        assert!(LoadTable::from_csv_reader(missing.as_bytes()).is_err());
        let split = "channel,name,power_kw,essential\n1,A,1,true\n2,A,1,true\n1,B,1,true\n3,A,1,true\n4,A,1,true\n";
        assert!(LoadTable::from_csv_reader(split.as_bytes()).is_err());
        let bad_bool =
            "channel,name,power_kw,essential\n1,A,1,yes\n2,A,1,true\n3,A,1,true\n4,A,1,true\n";
        assert!(LoadTable::from_csv_reader(bad_bool.as_bytes()).is_err());
    }
}
