// Downlink form: device selector, fport, base64 payload with a "request
// position" preset. Submit stays disabled until every field is valid, and
// server-side rejections surface inline instead of throwing.

import { ApiError, Client } from "./api.js";
import { GPS_PRESET_B64, isValidBase64 } from "./base64.js";

export class DownlinkForm {
  readonly element: HTMLFormElement;
  private readonly device: HTMLSelectElement;
  private readonly fport: HTMLInputElement;
  private readonly payload: HTMLInputElement;
  private readonly submit: HTMLButtonElement;
  private readonly error: HTMLElement;

  constructor(
    private readonly client: Client,
    private readonly onQueued: () => void,
  ) {
    this.element = document.createElement("form");
    this.element.className = "downlink";

    this.device = document.createElement("select");
    this.device.id = "dl-device";
    this.element.append(labeled("device", this.device));

    this.fport = document.createElement("input");
    this.fport.id = "dl-fport";
    this.fport.type = "number";
    this.fport.min = "1";
    this.fport.max = "223";
    this.fport.value = "1";
    this.element.append(labeled("fport", this.fport));

    this.payload = document.createElement("input");
    this.payload.id = "dl-payload";
    this.payload.type = "text";
    this.payload.placeholder = "base64 payload";
    this.payload.spellcheck = false;
    this.element.append(labeled("payload (base64)", this.payload));

    const row = document.createElement("div");
    row.className = "row";
    const preset = document.createElement("button");
    preset.type = "button";
    preset.id = "dl-preset";
    preset.textContent = "request position";
    this.submit = document.createElement("button");
    this.submit.type = "submit";
    this.submit.id = "dl-submit";
    this.submit.textContent = "queue downlink";
    row.append(preset, this.submit);
    this.element.append(row);

    this.error = document.createElement("div");
    this.error.className = "form-error";
    this.element.append(this.error);

    preset.addEventListener("click", () => {
      this.payload.value = GPS_PRESET_B64;
      this.refresh();
    });
    for (const input of [this.device, this.fport, this.payload]) {
      input.addEventListener("input", () => this.refresh());
      input.addEventListener("change", () => this.refresh());
    }
    this.element.addEventListener("submit", (event) => {
      event.preventDefault();
      void this.send();
    });
    this.refresh();
  }

  setDevices(ids: string[]): void {
    const selected = this.device.value;
    this.device.replaceChildren(
      ...ids.map((id) => {
        const option = document.createElement("option");
        option.value = id;
        option.textContent = id;
        return option;
      }),
    );
    if (ids.length > 0) {
      // Select explicitly; an unset select reads as "" in some DOMs.
      this.device.value = ids.includes(selected) ? selected : ids[0]!;
    }
    this.refresh();
  }

  get isSubmittable(): boolean {
    const fport = Number(this.fport.value);
    return (
      this.device.value !== "" &&
      Number.isInteger(fport) &&
      fport >= 1 &&
      fport <= 223 &&
      isValidBase64(this.payload.value)
    );
  }

  private refresh(): void {
    this.submit.disabled = !this.isSubmittable;
  }

  private async send(): Promise<void> {
    if (!this.isSubmittable) return;
    this.submit.disabled = true;
    try {
      await this.client.sendDownlink(
        this.device.value,
        Number(this.fport.value),
        this.payload.value,
      );
      this.error.textContent = "";
      this.onQueued();
    } catch (failure) {
      this.error.textContent =
        failure instanceof ApiError
          ? failure.message
          : "request failed; is the service up?";
    } finally {
      this.refresh();
    }
  }
}

function labeled(text: string, control: HTMLElement): HTMLLabelElement {
  const label = document.createElement("label");
  label.append(text, control);
  return label;
}
