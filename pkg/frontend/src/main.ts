import { ServiceError } from "./api.js";
import { mountApp } from "./app.js";
import { el, clear } from "./dom.js";
import { connect } from "./session.js";

function defaultServiceUrl(): string {
  // when served by the service itself under /ui, the API shares the origin
  if (typeof window !== "undefined" && window.location.protocol.startsWith("http")) {
    return window.location.origin;
  }
  return "http://127.0.0.1:8547";
}

function renderLogin(root: HTMLElement): void {
  clear(root);
  const urlInput = el("input", {
    type: "text", value: sessionStorage.getItem("service_url") || defaultServiceUrl(),
    class: "login-input",
  }) as HTMLInputElement;
  const credentialInput = el("input", {
    type: "password", value: sessionStorage.getItem("credential") || "",
    class: "login-input", placeholder: "bearer credential",
  }) as HTMLInputElement;
  const message = el("p", { class: "status" }, "");

  const form = el(
    "form",
    {
      class: "login",
      onsubmit: (event: Event) => {
        event.preventDefault();
        message.textContent = "connecting…";
        connect(urlInput.value.trim(), credentialInput.value.trim())
          .then((session) => {
            sessionStorage.setItem("service_url", urlInput.value.trim());
            sessionStorage.setItem("credential", credentialInput.value.trim());
            mountApp(root, session);
          })
          .catch((error) => {
            message.textContent =
              error instanceof ServiceError
                ? `${error.body.code}: ${error.body.message}`
                : String(error);
          });
      },
    },
    el("h1", {}, "Carbon credit market console"),
    el("label", { class: "field" }, "Service URL ", urlInput),
    el("label", { class: "field" }, "Credential ", credentialInput),
    el("button", { type: "submit" }, "Connect"),
    message,
  );
  root.append(form);
}

const rootElement = document.getElementById("root");
if (rootElement) renderLogin(rootElement);
