// Browser entry point. There is no signup flow: the server hands out
// bearer tokens out of band, the user pastes one here and it sticks in
// localStorage until they clear it.

import { mountApp } from "./app.js";

const TOKEN_KEY = "happimeter.token";
const BASE_KEY = "happimeter.base_url";

function startDashboard(root: HTMLElement, baseUrl: string, token: string): void {
  root.textContent = "";
  mountApp(root, { baseUrl, token });
}

function renderTokenForm(root: HTMLElement): void {
  const form = document.createElement("form");
  form.className = "token-form";

  const intro = document.createElement("p");
  intro.textContent = "Paste your access token to connect.";
  form.appendChild(intro);

  const baseInput = document.createElement("input");
  baseInput.type = "text";
  baseInput.name = "base_url";
  baseInput.placeholder = "server URL";
  baseInput.value = localStorage.getItem(BASE_KEY) ?? window.location.origin;
  form.appendChild(baseInput);

  const tokenInput = document.createElement("input");
  tokenInput.type = "password";
  tokenInput.name = "token";
  tokenInput.placeholder = "bearer token";
  form.appendChild(tokenInput);

  const connect = document.createElement("button");
  connect.type = "submit";
  connect.textContent = "Connect";
  form.appendChild(connect);

  form.addEventListener("submit", (event) => {
    event.preventDefault();
    const token = tokenInput.value.trim();
    if (!token) {
      return;
    }
    localStorage.setItem(TOKEN_KEY, token);
    localStorage.setItem(BASE_KEY, baseInput.value.trim());
    startDashboard(root, baseInput.value.trim(), token);
  });

  root.appendChild(form);
}

export function bootstrap(): void {
  const root = document.getElementById("app");
  if (!root) {
    return;
  }
  const token = localStorage.getItem(TOKEN_KEY);
  const baseUrl = localStorage.getItem(BASE_KEY) ?? window.location.origin;
  if (token) {
    startDashboard(root, baseUrl, token);
  } else {
    renderTokenForm(root);
  }
}

if (typeof document !== "undefined" && document.readyState !== "loading") {
  bootstrap();
} else if (typeof document !== "undefined") {
  document.addEventListener("DOMContentLoaded", bootstrap);
}
