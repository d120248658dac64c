pub use conewave::packets::random_cap_input;
