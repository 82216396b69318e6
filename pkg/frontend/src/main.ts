/**
 * DOM bootstrap for the workbench. All logic lives in the tested modules;
 * this file only wires widgets to the store and the API client. Each user
 * action issues exactly one API call (stats polling while a build is
 * running is the only background activity).
 */

import { ApiClient, ApiRequestError } from "./client.js";
import {
  checkedList,
  detents,
  effectiveCount,
  setting,
  snapDegree,
} from "./personalization.js";
import {
  PreferenceFormRow,
  emptyRow,
  formComplete,
  moveRow,
  rowComplete,
  rowValueError,
  setAllChecked,
  setAttribute,
  setDimension,
  setOperator,
  setValueText,
  toWirePreferences,
} from "./preferenceForm.js";
import {
  REBUILD_ACTION,
  renderError,
  renderResultTable,
} from "./queryConsole.js";
import { renderStatsBars } from "./statsPanel.js";
import {
  WorkbenchState,
  initialState,
  profileSaved,
  queryFailed,
  querySucceeded,
  rebuildRequested,
  sessionOpened,
  settingApplied,
  statsUpdated,
} from "./state.js";
import { OPERATORS, type Operator, type SchemaInfo } from "./types.js";

const client = new ApiClient("");
let state: WorkbenchState = initialState();
let schema: SchemaInfo | null = null;
let rows: PreferenceFormRow[] = [emptyRow()];
let pollTimer: ReturnType<typeof setInterval> | null = null;

function $(id: string): HTMLElement {
  const el = document.getElementById(id);
  if (!el) throw new Error(`missing element #${id}`);
  return el;
}

function setState(next: WorkbenchState): void {
  state = next;
  renderAll();
}

// --- auth ------------------------------------------------------------------

async function onLogin(register: boolean): Promise<void> {
  const userId = ($("user") as HTMLInputElement).value.trim();
  const passphrase = ($("pass") as HTMLInputElement).value;
  try {
    if (register) await client.register(userId, passphrase);
    const session = await client.openSession(userId, passphrase);
    schema = await client.schema();
    setState(sessionOpened(state, userId, session.needs_onboarding));
  } catch (err) {
    showToast(err);
  }
}

// --- onboarding form ---------------------------------------------------------

function renderForm(): void {
  const host = $("pref-rows");
  if (!schema) return;
  host.innerHTML = "";
  rows.forEach((row, index) => {
    const div = document.createElement("div");
    div.className = "pref-row" + (rowComplete(row) ? " complete" : "");

    const dimSel = document.createElement("select");
    dimSel.innerHTML =
      `<option value="">dimension...</option>` +
      schema!.dimensions
        .map((d) => `<option${d.name === row.dimension ? " selected" : ""}>${d.name}</option>`)
        .join("");
    dimSel.onchange = () => {
      rows[index] = setDimension(row, schema!, dimSel.value);
      renderForm();
    };

    const attrSel = document.createElement("select");
    const attrs = row.dimension
      ? schema!.dimensions.find((d) => d.name === row.dimension)!.attributes
      : [];
    attrSel.innerHTML =
      `<option value="">attribute...</option>` +
      attrs
        .map((a) => `<option${a.name === row.attribute ? " selected" : ""}>${a.name}</option>`)
        .join("");
    attrSel.onchange = () => {
      rows[index] = setAttribute(row, schema!, attrSel.value);
      renderForm();
    };

    const opSel = document.createElement("select");
    opSel.innerHTML = OPERATORS.map(
      (op) => `<option${op === row.operator ? " selected" : ""}>${op}</option>`,
    ).join("");
    opSel.disabled = row.allChecked;
    opSel.onchange = () => {
      rows[index] = setOperator(row, opSel.value as Operator);
      renderForm();
    };

    const value = document.createElement("input");
    value.type = row.valueKind === "date" ? "date" : "text";
    value.placeholder = row.valueKind ?? "value";
    value.value = row.valueText;
    value.disabled = row.allChecked;
    value.oninput = () => {
      rows[index] = setValueText(rows[index]!, value.value);
      $("save-profile").toggleAttribute("disabled", !formComplete(rows));
    };
    const error = rowValueError(row);
    if (error && row.valueText) value.title = error;

    const all = document.createElement("label");
    const allBox = document.createElement("input");
    allBox.type = "checkbox";
    allBox.checked = row.allChecked;
    allBox.onchange = () => {
      rows[index] = setAllChecked(row, allBox.checked);
      renderForm();
    };
    all.append(allBox, " all");

    const up = document.createElement("button");
    up.textContent = "↑";
    up.disabled = index === 0;
    up.onclick = () => {
      rows = moveRow(rows, index, index - 1);
      renderForm();
    };
    const down = document.createElement("button");
    down.textContent = "↓";
    down.disabled = index === rows.length - 1;
    down.onclick = () => {
      rows = moveRow(rows, index, index + 1);
      renderForm();
    };
    const remove = document.createElement("button");
    remove.textContent = "×";
    remove.onclick = () => {
      rows.splice(index, 1);
      if (!rows.length) rows.push(emptyRow());
      renderForm();
    };

    div.append(`${index + 1}. `, dimSel, attrSel, opSel, value, all, up, down, remove);
    host.append(div);
  });
  $("save-profile").toggleAttribute("disabled", !formComplete(rows));
}

async function onSaveProfile(): Promise<void> {
  if (!state.userId || !formComplete(rows)) return;
  try {
    const saved = await client.saveProfile(state.userId, toWirePreferences(rows));
    setState(profileSaved(state, saved.rebuild_enqueued));
    if (saved.warnings.length) {
      showToast(new Error(`profile saved with warnings: ${saved.warnings.join("; ")}`));
    }
    startPollingWhileBuilding();
  } catch (err) {
    showToast(err);
  }
}

// --- personalization ---------------------------------------------------------

async function onPersonalizationChange(): Promise<void> {
  if (!state.userId) return;
  const enabled = ($("pers-enabled") as HTMLInputElement).checked;
  const slider = $("degree") as HTMLInputElement;
  const snapped = snapDegree(Number(slider.value), rows.length);
  slider.value = String(snapped);
  try {
    const applied = await client.setPersonalization(
      state.userId,
      setting(enabled, snapped),
    );
    setState(settingApplied(state, { enabled, degree: snapped }, applied.view !== null));
    startPollingWhileBuilding();
  } catch (err) {
    showToast(err);
  }
}

function renderCheckedList(): void {
  const n = rows.length;
  const marks = checkedList(n, state.personalization.degree);
  $("degree-list").innerHTML = marks
    .map((on, i) => `<span class="${on ? "on" : "off"}">#${i + 1}</span>`)
    .join(" ");
  $("degree-label").textContent =
    `${effectiveCount(state.personalization.degree, n)}/${n} preferences active ` +
    `(detents: ${detents(n).map((d) => d.toFixed(2)).join(", ")})`;
}

// --- queries -------------------------------------------------------------------

async function onRunQuery(): Promise<void> {
  const text = ($("query-text") as HTMLTextAreaElement).value;
  try {
    const result = await client.query(text);
    setState(querySucceeded(state, text, result));
  } catch (err) {
    if (err instanceof ApiRequestError) {
      setState(queryFailed(state, text, err.error));
    } else {
      showToast(err);
    }
  }
}

async function onRebuild(): Promise<void> {
  if (!state.userId) return;
  try {
    await client.rebuildView(state.userId);
    setState(rebuildRequested(state));
    startPollingWhileBuilding();
  } catch (err) {
    showToast(err);
  }
}

// --- stats polling (the only background activity) -----------------------------

function startPollingWhileBuilding(): void {
  if (pollTimer !== null) return;
  pollTimer = setInterval(async () => {
    if (!state.userId || !state.building) {
      if (pollTimer !== null) clearInterval(pollTimer);
      pollTimer = null;
      return;
    }
    try {
      const stats = await client.viewStats(state.userId);
      if (!stats.stale) setState(statsUpdated(state, stats));
    } catch {
      // keep polling; the build may not have landed yet
    }
  }, 1000);
}

// --- rendering -----------------------------------------------------------------

function showToast(err: unknown): void {
  const message =
    err instanceof ApiRequestError ? `${err.error.code}: ${err.error.message}` : String(err);
  const toast = $("toast");
  toast.textContent = message;
  toast.classList.add("visible");
  setTimeout(() => toast.classList.remove("visible"), 4000);
}

function renderAll(): void {
  $("login-panel").hidden = state.userId !== null;
  $("workbench").hidden = state.userId === null;
  if (state.userId === null) return;

  $("onboarding").hidden = !state.needsOnboarding && !formComplete(rows);
  $("whoami").textContent = state.userId;
  renderForm();
  renderCheckedList();

  $("building").hidden = !state.building;
  const output = $("query-output");
  if (state.lastError) {
    output.innerHTML = renderError(state.lastQueryText, state.lastError);
  } else if (state.lastResult) {
    output.innerHTML = renderResultTable(state.lastResult);
  } else {
    output.innerHTML = "";
  }
  $("stale-banner").hidden = !state.staleBanner;
  $("stats").innerHTML = state.lastStats ? renderStatsBars(state.lastStats) : "";
}

export function bootstrap(): void {
  $("login").onclick = () => void onLogin(false);
  $("register").onclick = () => void onLogin(true);
  $("add-row").onclick = () => {
    rows.push(emptyRow());
    renderForm();
  };
  $("save-profile").onclick = () => void onSaveProfile();
  $("pers-enabled").onchange = () => void onPersonalizationChange();
  $("degree").onchange = () => void onPersonalizationChange();
  $("run-query").onclick = () => void onRunQuery();
  $("refresh-stats").onclick = async () => {
    if (!state.userId) return;
    try {
      setState(statsUpdated(state, await client.viewStats(state.userId)));
    } catch (err) {
      showToast(err);
    }
  };
  document.addEventListener("click", (event) => {
    const target = event.target as HTMLElement;
    if (target.dataset.action === REBUILD_ACTION) void onRebuild();
  });
  renderAll();
}

if (typeof document !== "undefined" && document.readyState !== "loading") {
  bootstrap();
} else if (typeof document !== "undefined") {
  document.addEventListener("DOMContentLoaded", bootstrap);
}
