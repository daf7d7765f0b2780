// Strict base64 validation for the downlink form: the submit button is gated
// on this, so it must reject anything the server's strict decoder rejects.

const BASE64_SHAPE =
  /^(?:[A-Za-z0-9+/]{4})*(?:[A-Za-z0-9+/]{4}|[A-Za-z0-9+/]{3}=|[A-Za-z0-9+/]{2}==)$/;

export function isValidBase64(text: string): boolean {
  return text.length % 4 === 0 && BASE64_SHAPE.test(text);
}

/** ASCII "gps" — the only downlink command the nodes understand. */
export const GPS_PRESET_B64 = "Z3Bz";
