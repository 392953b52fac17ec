/** Entry point: a small session picker, then the labeling console. */

import { Api } from "./api.js";
import { LabelingConsole } from "./console.js";

const api = new Api(
  new URLSearchParams(location.search).get("api") ?? "",
);

function field(label: string, input: HTMLElement): HTMLElement {
  const wrap = document.createElement("label");
  wrap.className = "picker-field";
  wrap.append(label, input);
  return wrap;
}

async function init(): Promise<void> {
  const app = document.getElementById("app");
  if (app === null) {
    throw new Error("missing #app container");
  }
  const datasets = await api.listDatasets();
  const names = Object.keys(datasets);

  const picker = document.createElement("form");
  picker.className = "picker";
  const dataset = document.createElement("select");
  for (const name of names) {
    const option = document.createElement("option");
    const info = datasets[name];
    option.value = name;
    option.textContent = `${name} (${info.size} examples)`;
    dataset.appendChild(option);
  }
  const budget = document.createElement("input");
  budget.type = "number";
  budget.min = "0";
  budget.value = "100";
  const splitter = document.createElement("select");
  for (const kind of ["kmeans2", "logistic"]) {
    const option = document.createElement("option");
    option.value = kind;
    option.textContent = kind;
    splitter.appendChild(option);
  }
  const ratio = document.createElement("input");
  ratio.type = "number";
  ratio.min = "0";
  ratio.max = "1";
  ratio.step = "0.05";
  ratio.value = "0";
  const seed = document.createElement("input");
  seed.type = "number";
  seed.value = "0";
  const start = document.createElement("button");
  start.textContent = "Start labeling";

  picker.append(
    field("Dataset", dataset),
    field("Budget", budget),
    field("Splitter", splitter),
    field("Training ratio", ratio),
    field("Seed", seed),
    start,
  );
  app.appendChild(picker);

  picker.addEventListener("submit", (event) => {
    event.preventDefault();
    void (async () => {
      const created = await api.createSession(dataset.value, {
        budget: Number(budget.value),
        splitter: splitter.value,
        training_ratio: Number(ratio.value),
        seed: Number(seed.value),
      });
      app.innerHTML = "";
      const mount = document.createElement("div");
      app.appendChild(mount);
      new LabelingConsole(api, created.session_id, mount).start();
    })();
  });
}

void init().catch((error) => {
  const app = document.getElementById("app");
  if (app !== null) {
    app.textContent = `Cannot reach the labeling service: ${error}`;
  }
});
