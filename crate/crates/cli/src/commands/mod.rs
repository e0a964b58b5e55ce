pub mod channels;
pub mod cuntz;
pub mod dhr;
pub mod examples;
pub mod sectors;
pub mod thermal;
