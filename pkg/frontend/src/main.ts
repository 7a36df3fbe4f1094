import { ReviewApi } from "./api.js";
import { AppElements, ReviewApp } from "./app.js";

function byId<T extends HTMLElement>(id: string): T {
  const el = document.getElementById(id);
  if (!el) {
    throw new Error(`missing element #${id}`);
  }
  return el as T;
}

export function collectElements(): AppElements {
  return {
    loginForm: byId("login"),
    userInput: byId<HTMLInputElement>("user-input"),
    startButton: byId<HTMLButtonElement>("start"),
    session: byId("session"),
    image: byId<HTMLImageElement>("item-image"),
    question: byId("item-question"),
    expectedAnswer: byId("item-answer"),
    progress: byId("progress"),
    buttons: {
      yes: byId<HTMLButtonElement>("label-yes"),
      no: byId<HTMLButtonElement>("label-no"),
      ambiguous: byId<HTMLButtonElement>("label-ambiguous"),
    },
    doneScreen: byId("done"),
    errorBanner: byId("error-banner"),
    retryButton: byId<HTMLButtonElement>("retry"),
    agreementPanel: byId("agreement"),
  };
}

const app = new ReviewApp(new ReviewApi(""), collectElements());
app.bind(document);
