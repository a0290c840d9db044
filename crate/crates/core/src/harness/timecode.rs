//! SMPTE `HH:MM:SS:FF` timecodes.

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};
use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum TimecodeError {
    #[error("malformed timecode '{0}', expected HH:MM:SS:FF")]
    Parse(String),
    #[error("frame field {frames} out of range at {fps} fps")]
    InvalidFrameField { frames: u32, fps: f64 },
    #[error("fps must be positive, got {0}")]
    InvalidFps(f64),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct Timecode {
    pub hours: u32,
    pub minutes: u32,
    pub seconds: u32,
    pub frames: u32,
}

impl Timecode {
    pub fn whole_seconds(&self) -> u64 {
        3600 * u64::from(self.hours) + 60 * u64::from(self.minutes) + u64::from(self.seconds)
    }

    /// `round(fps * seconds) + frames`; the frame field must be below `ceil(fps)`.
    pub fn frame_index(&self, fps: f64) -> Result<u64, TimecodeError> {
        if !(fps.is_finite() && fps > 0.0) {
            return Err(TimecodeError::InvalidFps(fps));
        }
        if f64::from(self.frames) >= fps.ceil() {
            return Err(TimecodeError::InvalidFrameField {
                frames: self.frames,
                fps,
            });
        }
        Ok((fps * self.whole_seconds() as f64).round() as u64 + u64::from(self.frames))
    }
}

impl FromStr for Timecode {
    type Err = TimecodeError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let bad = || TimecodeError::Parse(s.to_string());
        let fields: Vec<&str> = s.split(':').collect();
        if fields.len() != 4 {
            return Err(bad());
        }
        let mut nums = [0u32; 4];
        for (slot, f) in nums.iter_mut().zip(&fields) {
            if f.len() != 2 || !f.bytes().all(|b| b.is_ascii_digit()) {
                return Err(bad());
            }
            *slot = f.parse().map_err(|_| bad())?;
        }
        let [hours, minutes, seconds, frames] = nums;
        if minutes >= 60 || seconds >= 60 {
            return Err(bad());
        }
        Ok(Timecode {
            hours,
            minutes,
            seconds,
            frames,
        })
    }
}

impl fmt::Display for Timecode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "{:02}:{:02}:{:02}:{:02}",
            self.hours, self.minutes, self.seconds, self.frames
        )
    }
}

/// Frame index of a timecode at `fps`.
pub fn parse_timecode(tc: &str, fps: f64) -> Result<u64, TimecodeError> {
    tc.trim().parse::<Timecode>()?.frame_index(fps)
}
